# Score file ingestion and synthetic exam generation

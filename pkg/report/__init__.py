# Report module

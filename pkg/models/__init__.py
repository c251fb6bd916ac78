# Item regression and consensus models

// placeholder, filled in by the loda_solver module

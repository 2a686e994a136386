// placeholder, filled in by the invariance module

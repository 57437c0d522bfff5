# End-to-end tests module

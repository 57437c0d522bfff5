# Integration tests for gaitscope

# Tests for the wfkit library

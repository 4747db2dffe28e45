# Tests for the wfkit CLI

# wfkit CLI

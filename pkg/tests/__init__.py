# gpminer Tests

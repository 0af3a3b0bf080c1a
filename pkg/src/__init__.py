# gpminer - graph pattern mining

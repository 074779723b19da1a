from NonMarkov.maps.stochastic_maps import *

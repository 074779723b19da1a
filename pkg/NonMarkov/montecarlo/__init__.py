from NonMarkov.montecarlo.simulation import *

from NonMarkov.measure.nonmarkov_measure import *
from NonMarkov.measure.sweeps import *

from NonMarkov.counterexample.rate_functions import *
from NonMarkov.counterexample.two_rate_model import *

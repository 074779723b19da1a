from NonMarkov.semimarkov.two_site import *

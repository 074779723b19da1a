from NonMarkov.waiting_time.waiting_time import *
from NonMarkov.waiting_time.wtd_parser import format_wtd, parse_wtd

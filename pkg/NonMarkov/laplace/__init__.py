from NonMarkov.laplace.polynomial import Polynomial, Root, poly_arith, roots
from NonMarkov.laplace.rational import RationalFunction, rational_arith, reduce_rational
from NonMarkov.laplace.exp_polynomial import ExpPolynomial, ExpTerm, deriv_exp_poly, eval_exp_poly, inverse_laplace
from NonMarkov.laplace.talbot import contour_degree, talbot_inverse

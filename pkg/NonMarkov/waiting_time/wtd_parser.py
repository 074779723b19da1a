"""
    Text form of waiting time specs.

        wtd     := "exp(" RATE ")" | "erlang(" INT "," RATE ")"
                 | "conv(" wtd ("," wtd)+ ")" | "mix(" branch ("," branch)+ ")"
        branch  := WEIGHT ":" wtd

    RATE and WEIGHT are decimal literals, whitespace is insignificant.
    Only syntax is checked here; positivity and weight sums are left to
    waiting_time.validate.
"""

import re

from NonMarkov.errors import WtdSyntaxError
from NonMarkov.waiting_time.waiting_time import Branch, Convolution, Erlang, Exponential, Mixture, WaitingTimeSpec

__all__ = ["parse_wtd", "format_wtd"]

NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
INTEGER = re.compile(r"[+-]?\d+(?![\d.eE])")
NAME = re.compile(r"[A-Za-z_]+")


class WtdParser:

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def parse(self) -> WaitingTimeSpec:
        spec = self._wtd()
        self._skip_space()
        if self.pos != len(self.text):
            self._fail("unexpected trailing input")
        return spec

    def _wtd(self) -> WaitingTimeSpec:
        self._skip_space()
        match = NAME.match(self.text, self.pos)
        if match is None:
            self._fail("expected 'exp', 'erlang', 'conv' or 'mix'")
        name = match.group(0)
        if name not in ("exp", "erlang", "conv", "mix"):
            self._fail(f"unknown distribution '{name}'")
        self.pos = match.end()
        self._expect("(")

        if name == "exp":
            spec = Exponential(self._number())
        elif name == "erlang":
            n = self._integer()
            self._expect(",")
            spec = Erlang(n, self._number())
        elif name == "conv":
            children = [self._wtd()]
            self._expect(",")
            children.append(self._wtd())
            while self._accept(","):
                children.append(self._wtd())
            spec = Convolution(tuple(children))
        else:
            branches = [self._branch()]
            self._expect(",")
            branches.append(self._branch())
            while self._accept(","):
                branches.append(self._branch())
            spec = Mixture(tuple(branches))

        self._expect(")")
        return spec

    def _branch(self) -> Branch:
        weight = self._number()
        self._expect(":")
        return Branch(weight, self._wtd())

    def _number(self) -> float:
        self._skip_space()
        match = NUMBER.match(self.text, self.pos)
        if match is None:
            self._fail("expected number")
        self.pos = match.end()
        return float(match.group(0))

    def _integer(self) -> int:
        self._skip_space()
        match = INTEGER.match(self.text, self.pos)
        if match is None:
            self._fail("expected integer")
        self.pos = match.end()
        return int(match.group(0))

    def _accept(self, symbol: str) -> bool:
        self._skip_space()
        if self.text.startswith(symbol, self.pos):
            self.pos += len(symbol)
            return True
        return False

    def _expect(self, symbol: str):
        if not self._accept(symbol):
            self._fail(f"expected '{symbol}'")

    def _skip_space(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _fail(self, message: str):
        line = self.text.count("\n", 0, self.pos) + 1
        column = self.pos - (self.text.rfind("\n", 0, self.pos) + 1) + 1
        raise WtdSyntaxError(message, line, column)


def parse_wtd(text: str) -> WaitingTimeSpec:
    '''
    Parses the text form of a waiting time spec.

    Raises:
        WtdSyntaxError with the 1-based line and column of the offending
        character, e.g. "expected ':' at col 9" for "mix(0.5 exp(1))".
    '''
    return WtdParser(text).parse()


def format_wtd(spec: WaitingTimeSpec) -> str:
    """Canonical text form; parse_wtd(format_wtd(spec)) == spec."""
    if isinstance(spec, Exponential):
        return f"exp({float(spec.rate)!r})"
    if isinstance(spec, Erlang):
        return f"erlang({int(spec.n)},{float(spec.rate)!r})"
    if isinstance(spec, Convolution):
        return "conv(" + ",".join(format_wtd(child) for child in spec.children) + ")"
    return "mix(" + ",".join(f"{float(branch.weight)!r}:{format_wtd(branch.child)}"
                             for branch in spec.branches) + ")"

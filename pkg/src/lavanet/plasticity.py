"""Learning-rule language and trace-based plasticity on ex->ex synapses.

Grammar (whitespace insignificant)::

    rule   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := INT '^' ['+'|'-'] INT | DECIMAL | VARIABLE

Numeric factors of a term multiply into its coefficient (1 when absent).
Variables: x0, x1 at the pre-synaptic neuron, y0, y1, y2 at the
post-synaptic neuron, w the synapse's current weight. x0/y0 are 0/1 spike
indicators of the current learning epoch, the others exponential traces.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UnknownVariable

VARIABLES = ("x0", "x1", "y0", "y1", "y2", "w")
# hardware variables without a semantics here: delay, tag, epoch state, ...
UNSUPPORTED = {"x2", "y3", "d", "t", "r0", "r1"} | {f"u{k}" for k in range(10)}


@dataclass(frozen=True)
class Term:
    sign: int
    coefficient: float
    factors: tuple

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")


@dataclass(frozen=True)
class RuleAst:
    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a rule needs at least one term")

    @property
    def variables(self):
        return {f for t in self.terms for f in t.factors}


# --- tokenizer / parser ----------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*^])|(?P<bad>\S))")


def _tokenize(text):
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m:
            break
        kind = m.lastgroup
        start = m.start(kind)
        if kind == "bad":
            raise ParseError(start, "a number, variable or operator", text)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, expected, tok=None):
        tok = tok or self.peek()
        return ParseError(tok[2], expected, self.text)

    def rule(self):
        sign = 1
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        terms = [self.term(sign)]
        while True:
            kind, val, _ = self.peek()
            if kind == "eof":
                break
            if kind == "op" and val in "+-":
                self.take()
                terms.append(self.term(-1 if val == "-" else 1))
            else:
                raise self.error("'+', '-' or end of rule")
        return RuleAst(tuple(terms))

    def term(self, sign):
        coef = 1.0
        factors = []
        while True:
            num, var = self.factor()
            if var is None:
                coef *= num
            else:
                factors.append(var)
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                continue
            return Term(sign, coef, tuple(factors))

    def factor(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "ident":
            if val in VARIABLES:
                return None, val
            if val in UNSUPPORTED:
                raise UnknownVariable(f"variable {val!r} at position {pos} is not supported "
                                      f"(supported: {', '.join(VARIABLES)})")
            raise ParseError(pos, f"a variable ({', '.join(VARIABLES)})", self.text)
        if kind != "num":
            raise ParseError(pos, "a number or variable", self.text)
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            if "." in val:
                raise ParseError(pos, "an integer base before '^'", self.text)
            self.take()
            exp_sign = 1
            k, v, _ = self.peek()
            if k == "op" and v in "+-":
                self.take()
                exp_sign = -1 if v == "-" else 1
            k, v, p = self.take()
            if k != "num" or "." in v:
                raise ParseError(p, "an integer exponent after '^'", self.text)
            try:
                return float(int(val) ** (exp_sign * int(v))), None
            except OverflowError:
                raise ParseError(pos, "a coefficient representable as a float", self.text) from None
        return float(val), None


def parse_rule(text):
    return _Parser(text).rule()


def _format_coefficient(c):
    if c > 0:
        mant, exp = math.frexp(c)
        if mant == 0.5 and exp - 1 != 0:
            return f"2^{exp - 1}"
    return np.format_float_positional(c, unique=True, trim="-")


def format_rule(ast):
    """Canonical text of a rule; parse_rule(format_rule(a)) == a."""
    out = []
    for i, t in enumerate(ast.terms):
        parts = []
        if t.coefficient != 1.0 or not t.factors:
            parts.append(_format_coefficient(t.coefficient))
        parts.extend(t.factors)
        body = "*".join(parts)
        if i == 0:
            out.append(("-" if t.sign < 0 else "") + body)
        else:
            out.append(("- " if t.sign < 0 else "+ ") + body)
    return " ".join(out)


# --- traces ----------------------------------------------------------------


@dataclass
class TraceState:
    """Traces over all reservoir neurons; x* read at sources, y* at targets."""

    x1: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    x0: np.ndarray
    y0: np.ndarray

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n, dtype=bool), np.zeros(n, dtype=bool))

    def clear(self):
        for a in (self.x1, self.y1, self.y2):
            a[:] = 0.0
        self.end_epoch()

    def end_epoch(self):
        self.x0[:] = False
        self.y0[:] = False


def update_traces(state, pre_spikes, post_spikes, tau_pre, tau_post, impulse, tau_post2=None):
    """Decay traces by (1 - 1/tau) and add ``impulse`` where a spike occurred.

    x0/y0 accumulate the spikes of the running epoch until end_epoch().
    """
    tau_post2 = tau_post if tau_post2 is None else tau_post2
    state.x1 *= 1.0 - 1.0 / tau_pre
    state.x1 += impulse * pre_spikes
    state.y1 *= 1.0 - 1.0 / tau_post
    state.y1 += impulse * post_spikes
    state.y2 *= 1.0 - 1.0 / tau_post2
    state.y2 += impulse * post_spikes
    state.x0 |= pre_spikes
    state.y0 |= post_spikes
    return state


# --- weight updates --------------------------------------------------------


def evaluate(ast, env):
    """Sum over terms of sign * coefficient * product of factors."""
    total = 0.0
    for t in ast.terms:
        val = t.sign * t.coefficient
        for f in t.factors:
            if f not in env:
                raise UnknownVariable(f"variable {f!r} is not supported")
            val = val * env[f]
        total = total + val
    return total


def check_variables(ast):
    bad = ast.variables - set(VARIABLES)
    if bad:
        raise UnknownVariable(f"unsupported variables: {', '.join(sorted(bad))}")


def apply_rule(ast, chunk, post_index, pre_index, traces, w_max, plastic=None):
    """New chunk with updated weights on its existing synapses.

    ``post_index``/``pre_index`` give the global target/source neuron of each
    stored entry; ``plastic`` masks the entries the rule may change. Weights
    are clipped to [0, w_max]; the sparsity pattern never changes.
    """
    check_variables(ast)
    if plastic is None:
        plastic = np.ones(chunk.nnz, dtype=bool)
    if not plastic.any():
        return chunk
    pre, post = pre_index[plastic], post_index[plastic]
    w = chunk.values[plastic]
    env = {
        "x0": traces.x0[pre].astype(float),
        "x1": traces.x1[pre],
        "y0": traces.y0[post].astype(float),
        "y1": traces.y1[post],
        "y2": traces.y2[post],
        "w": w,
    }
    dw = evaluate(ast, env)
    values = chunk.values.copy()
    values[plastic] = np.clip(w + dw, 0.0, w_max)
    return chunk.with_values(values)


class LearningRule:
    """Applies a parsed rule to the ex->ex entries of every core's chunks."""

    def __init__(self, ast, layout, n_ex, w_max):
        check_variables(ast)
        self.ast = ast
        self.w_max = float(w_max)
        self.n_ex = n_ex
        self.layout = layout
        self._index = {}

    def _chunk_index(self, a, b, chunk):
        key = (a, b)
        if key not in self._index:
            r0 = self.layout.neuronRanges[a][0]
            c0 = self.layout.neuronRanges[b][0]
            post = chunk.entry_rows() + r0
            pre = chunk.columnIndices + c0
            self._index[key] = (post, pre, (post < self.n_ex) & (pre < self.n_ex))
        return self._index[key]

    def apply(self, sim, traces):
        for core in sim.cores:
            for b, chunk in enumerate(core.chunks):
                if chunk.nnz == 0:
                    continue
                post, pre, plastic = self._chunk_index(core.core_id, b, chunk)
                if plastic.any():
                    core.set_chunk(b, apply_rule(self.ast, chunk, post, pre, traces, self.w_max, plastic))

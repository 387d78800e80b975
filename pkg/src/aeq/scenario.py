"""Scenario files: parsing, validation, serialization, and built-ins.

A scenario is a UTF-8 text file (extension ``.aeq``, header
``aeq-version = 1``) holding the system matrices in the term grammar,
decay certificates, almost periodic signals, and run directives.  The
format is line-oriented only for humans; structurally it is brace-delimited
blocks, so it diffs and round-trips cleanly.  See the README for the full
schema.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields

import numpy as np

from .almostperiodic import APSignal
from .certificates import TailCertificate
from .errors import InputError, ScenarioError
from .matrixfn import MatrixFunction
from .quasilinear import Forcing, ForcingTerm
from .terms import Term, terms_to_str

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<symbol>[{}\[\](),=+\-*^])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ScenarioError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "newline":
            line += 1
            col = 1
        elif kind not in ("ws", "comment"):
            tokens.append(_Token(kind if kind != "symbol" else value, value, line, col))
            col += len(value)
        else:
            col += len(value)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, ahead=0):
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ScenarioError(message, tok.line, tok.col)

    def expect(self, kind, value=None):
        tok = self.next()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value or kind
            self.error(f"expected {want!r}, found {tok.value or 'end of file'!r}", tok)
        return tok

    def expect_ident(self, value=None):
        return self.expect("ident", value)

    # ------------------------------------------------------------------ values

    def parse_real(self):
        sign = 1.0
        if self.peek().kind == "-":
            self.next()
            sign = -1.0
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return sign * float(tok.value)
        if tok.kind == "ident" and tok.value == "pi":
            self.next()
            return sign * math.pi
        if tok.kind == "ident" and tok.value == "sqrt":
            self.next()
            self.expect("(")
            inner = self.expect("number")
            self.expect(")")
            return sign * math.sqrt(float(inner.value))
        self.error(f"expected a number, found {tok.value or 'end of file'!r}", tok)

    def parse_int(self):
        sign = 1
        if self.peek().kind == "-":
            self.next()
            sign = -1
        tok = self.expect("number")
        value = float(tok.value)
        if value != int(value):
            self.error(f"expected an integer, found {tok.value!r}", tok)
        return sign * int(value)

    def parse_bool(self):
        tok = self.expect_ident()
        if tok.value not in ("true", "false"):
            self.error(f"expected true or false, found {tok.value!r}", tok)
        return tok.value == "true"

    def parse_vector(self):
        self.expect("[")
        out = [self.parse_real()]
        while self.peek().kind == ",":
            self.next()
            out.append(self.parse_real())
        self.expect("]")
        return out

    def parse_matrix_literal(self):
        self.expect("[")
        rows = [self.parse_vector()]
        while self.peek().kind == ",":
            self.next()
            rows.append(self.parse_vector())
        self.expect("]")
        if len({len(r) for r in rows}) != 1:
            self.error("matrix literal rows differ in length")
        return rows

    # ------------------------------------------------------------------- terms

    def parse_term(self):
        """One product: [coeff '*'] factor ('*' factor)*, or a bare coeff."""
        coeff = 1.0
        power = 0
        rate = 0.0
        rate_abs = False
        trig = ""
        freq = 0.0
        have_coeff = False
        have_any = False

        if self.peek().kind in ("number", "-") or \
                (self.peek().kind == "ident" and self.peek().value in ("pi", "sqrt")):
            coeff = self.parse_real()
            have_coeff = True
            have_any = True
            if self.peek().kind != "*":
                return Term(coeff) if coeff != 0.0 else None

        while True:
            if have_any:
                if self.peek().kind != "*":
                    break
                self.next()
            tok = self.peek()
            if tok.kind == "(":
                if power:
                    self.error("duplicate (t+1) factor in term", tok)
                self.next()
                self.expect_ident("t")
                self.expect("+")
                one = self.expect("number")
                if float(one.value) != 1.0:
                    self.error("only (t+1) is supported as a polynomial base", one)
                self.expect(")")
                self.expect("^")
                power = self.parse_int()
            elif tok.kind == "ident" and tok.value == "exp":
                if rate != 0.0:
                    self.error("duplicate exponential factor in term", tok)
                self.next()
                self.expect("(")
                rate = self.parse_real()
                self.expect("*")
                var = self.expect_ident()
                if var.value == "abs":
                    self.expect("(")
                    self.expect_ident("t")
                    self.expect(")")
                    rate_abs = True
                elif var.value != "t":
                    self.error(f"expected t or abs(t), found {var.value!r}", var)
                self.expect(")")
            elif tok.kind == "ident" and tok.value in ("sin", "cos"):
                if trig:
                    self.error("duplicate trig factor in term", tok)
                self.next()
                trig = tok.value
                self.expect("(")
                freq = self.parse_real()
                if freq < 0:
                    self.error("trig frequency must be >= 0", tok)
                self.expect("*")
                self.expect_ident("t")
                self.expect(")")
            else:
                if have_any:
                    self.error(f"expected a factor after '*', found "
                               f"{tok.value or 'end of file'!r}", tok)
                self.error(f"expected a term, found {tok.value or 'end of file'!r}", tok)
            have_any = True

        if not have_coeff and not (power or rate != 0.0 or trig):
            self.error("empty term")
        if coeff == 0.0:
            return None
        return Term(coeff, power, rate, rate_abs, trig, freq)

    def parse_entry(self):
        """Sum of terms (a single matrix entry)."""
        terms = []
        term = self.parse_term()
        if term is not None:
            terms.append(term)
        while self.peek().kind in ("+", "-"):
            op = self.next()
            term = self.parse_term()
            if term is not None:
                if op.kind == "-":
                    term = Term(-term.coeff, term.power, term.rate,
                                term.rate_abs, term.trig, term.freq)
                terms.append(term)
        return tuple(terms)

    # ------------------------------------------------------------------ blocks

    def parse_matrix_block(self):
        name_tok = self.expect_ident()
        if name_tok.value not in ("A", "B", "C"):
            self.error(f"matrix name must be A, B or C, found {name_tok.value!r}",
                       name_tok)
        self.expect("{")
        parity = "none"
        rows = []
        while self.peek().kind != "}":
            tok = self.peek()
            if tok.kind == "ident" and tok.value == "parity":
                self.next()
                self.expect("=")
                par = self.expect_ident()
                if par.value not in ("even", "odd", "none"):
                    self.error(f"unknown parity {par.value!r}", par)
                parity = par.value
            elif tok.kind == "ident" and tok.value == "row":
                self.next()
                row = [self.parse_entry()]
                while self.peek().kind == ",":
                    self.next()
                    row.append(self.parse_entry())
                rows.append(row)
            else:
                self.error(f"expected 'row' or 'parity', found {tok.value or 'end of file'!r}",
                           tok)
        self.expect("}")
        if not rows:
            self.error(f"matrix {name_tok.value} has no rows", name_tok)
        if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
            self.error(f"matrix {name_tok.value} is not square", name_tok)
        return name_tok, MatrixFunction.from_terms(rows, parity=parity)

    def parse_cert_block(self):
        name = self.expect_ident()
        self.expect("{")
        values = {}
        order = ("K", "m", "lambda", "t_star")
        for i, key in enumerate(order):
            tok = self.expect_ident(key)
            self.expect("=")
            if key == "K" and self.peek().kind == "ident" and self.peek().value == "fit":
                self.next()
                values["K"] = None
            elif key == "m":
                values["m"] = self.parse_int()
            else:
                values[key] = self.parse_real()
            if i < len(order) - 1:
                self.expect(",")
        self.expect("}")
        try:
            cert = TailCertificate(K=values["K"], m=values["m"],
                                   lam=values["lambda"], t_star=values["t_star"])
        except InputError as exc:
            self.error(str(exc), name)
        return name.value, cert

    def parse_forcing_block(self):
        name = self.expect_ident()
        if name.value != "f":
            self.error(f"forcing name must be f, found {name.value!r}", name)
        self.expect("{")
        terms = []
        while self.peek().kind != "}":
            self.expect_ident("term")
            scalar = self.parse_entry()
            self.expect_ident("gain")
            if self.peek().kind == "ident" and self.peek().value == "identity":
                self.next()
                gain = None
            else:
                gain = self.parse_matrix_literal()
            terms.append((scalar, gain))
        self.expect("}")
        if not terms:
            self.error("forcing block has no terms", name)
        return terms

    def parse_signal_block(self):
        name = self.expect_ident()
        self.expect("{")
        parts = []
        while self.peek().kind != "}":
            self.expect_ident("component")
            self.expect("{")
            self.expect_ident("omega")
            self.expect("=")
            omega = self.parse_real()
            self.expect(",")
            self.expect_ident("a")
            self.expect("=")
            a = self.parse_vector()
            self.expect(",")
            self.expect_ident("b")
            self.expect("=")
            b = self.parse_vector()
            self.expect("}")
            parts.append((omega, a, b))
        self.expect("}")
        return name.value, parts

    def parse_run_block(self):
        self.expect("{")
        directives = {}
        while self.peek().kind != "}":
            key = self.expect_ident()
            self.expect("=")
            if key.value in _RUN_REAL_KEYS:
                directives[key.value] = self.parse_real()
            elif key.value == "two_sided":
                directives[key.value] = self.parse_bool()
            elif key.value == "initial":
                directives[key.value] = self.parse_matrix_literal()
            elif key.value in ("u0", "classify_c"):
                directives[key.value] = self.parse_vector()
            elif key.value in ("cert", "signal"):
                directives[key.value] = self.expect_ident().value
            else:
                self.error(f"unknown run directive {key.value!r}", key)
        self.expect("}")
        return directives


_RUN_REAL_KEYS = ("horizon", "tol", "eps", "check_tol", "ap_tol", "ap_eps",
                  "ap_horizon", "c5_horizon", "c5_tol")


@dataclass
class RunDirectives:
    horizon: float = 20.0
    tol: float = 1e-8
    eps: float = 0.5
    check_tol: float = 1e-4
    ap_tol: float = 1e-3
    ap_eps: float = 0.1
    ap_horizon: float | None = None
    c5_horizon: float | None = None
    c5_tol: float | None = None
    two_sided: bool = False
    initial: list | None = None
    u0: list | None = None
    classify_c: list | None = None
    cert: str | None = None
    signal: str | None = None


@dataclass
class Scenario:
    """Validated scenario: systems, certificates, signals, run directives."""

    name: str
    dim: int
    A: MatrixFunction | None = None
    B: MatrixFunction | None = None
    C: np.ndarray | None = None
    forcing: Forcing | None = None
    certs: dict = field(default_factory=dict)
    signals: dict = field(default_factory=dict)
    run: RunDirectives = field(default_factory=RunDirectives)

    @property
    def kind(self):
        return "linear" if self.A is not None else "quasilinear"

    def main_cert(self) -> TailCertificate:
        if self.run.cert is not None:
            return self.certs[self.run.cert]
        if len(self.certs) == 1:
            return next(iter(self.certs.values()))
        raise InputError("scenario does not single out a certificate; set run.cert")

    def main_signal(self) -> APSignal | None:
        if self.run.signal is not None:
            return self.signals[self.run.signal]
        return None

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return serialize(self) == serialize(other)


def parse(text: str) -> Scenario:
    """Parse and fully validate scenario text; errors carry line/column."""
    p = _Parser(text)
    p.expect_ident("aeq")
    p.expect("-")
    p.expect_ident("version")
    p.expect("=")
    version = p.expect("number")
    if float(version.value) != 1:
        p.error(f"unsupported aeq-version {version.value}", version)

    name = "scenario"
    dim = None
    matrices = {}
    forcing_raw = None
    certs = {}
    signals_raw = {}
    run_raw = {}

    while p.peek().kind != "eof":
        tok = p.peek()
        if tok.kind != "ident":
            p.error(f"expected a block or key, found {tok.value!r}", tok)
        if tok.value == "name":
            p.next()
            p.expect("=")
            name = p.expect("string").value.strip('"')
        elif tok.value == "dim":
            p.next()
            p.expect("=")
            dim = p.parse_int()
            if dim < 1:
                p.error("dim must be a positive integer", tok)
        elif tok.value == "matrix":
            p.next()
            name_tok, mf = p.parse_matrix_block()
            if name_tok.value in matrices:
                p.error(f"duplicate matrix {name_tok.value}", name_tok)
            matrices[name_tok.value] = mf
        elif tok.value == "cert":
            p.next()
            cname, cert = p.parse_cert_block()
            if cname in certs:
                p.error(f"duplicate certificate {cname!r}", tok)
            certs[cname] = cert
        elif tok.value == "forcing":
            p.next()
            if forcing_raw is not None:
                p.error("duplicate forcing block", tok)
            forcing_raw = p.parse_forcing_block()
        elif tok.value == "signal":
            p.next()
            sname, parts = p.parse_signal_block()
            if sname in signals_raw:
                p.error(f"duplicate signal {sname!r}", tok)
            signals_raw[sname] = parts
        elif tok.value == "run":
            p.next()
            if run_raw:
                p.error("duplicate run block", tok)
            run_raw = p.parse_run_block()
        else:
            p.error(f"unknown key {tok.value!r}", tok)

    if dim is None:
        p.error("scenario does not declare dim")

    scenario = _assemble(name, dim, matrices, forcing_raw, certs, signals_raw,
                         run_raw, p)
    _validate(scenario)
    return scenario


def _assemble(name, dim, matrices, forcing_raw, certs, signals_raw, run_raw, p):
    run = RunDirectives(**run_raw)
    A = matrices.get("A")
    B = matrices.get("B")
    C_mf = matrices.get("C")

    C = None
    forcing = None
    if C_mf is not None:
        if not C_mf.is_constant():
            raise InputError("matrix C must be constant")
        C = C_mf.constant_value()
    if forcing_raw is not None:
        fterms = []
        for scalar, gain in forcing_raw:
            gain_arr = np.eye(dim) if gain is None else np.asarray(gain, dtype=float)
            if gain_arr.shape != (dim, dim):
                raise InputError("forcing gain does not match dim")
            fterms.append(ForcingTerm(scalar, gain_arr))
        forcing = Forcing(fterms, dim)

    signals = {sname: APSignal.build(dim, parts)
               for sname, parts in signals_raw.items()}
    return Scenario(name=name, dim=dim, A=A, B=B, C=C, forcing=forcing,
                    certs=certs, signals=signals, run=run)


def _validate(s: Scenario):
    has_linear = s.A is not None or s.B is not None
    has_quasi = s.C is not None or s.forcing is not None
    if has_linear and has_quasi:
        raise InputError("scenario mixes linear (A, B) and quasilinear (C, f) systems")
    if has_linear and (s.A is None or s.B is None):
        raise InputError("linear scenario needs both A and B")
    if has_quasi and (s.C is None or s.forcing is None):
        raise InputError("quasilinear scenario needs both C and a forcing f")
    if not has_linear and not has_quasi:
        raise InputError("scenario defines no system")
    for label, mf in (("A", s.A), ("B", s.B)):
        if mf is not None and mf.dim != s.dim:
            raise InputError(f"matrix {label} has dimension {mf.dim}, scenario dim {s.dim}")
    if s.C is not None and s.C.shape != (s.dim, s.dim):
        raise InputError("matrix C does not match the scenario dim")
    for label, vecs in (("initial", s.run.initial),):
        if vecs is not None and any(len(v) != s.dim for v in vecs):
            raise InputError(f"{label} vectors must have length dim = {s.dim}")
    for label, vec in (("u0", s.run.u0), ("classify_c", s.run.classify_c)):
        if vec is not None and len(vec) != s.dim:
            raise InputError(f"{label} must have length dim = {s.dim}")
    for ref, table, what in ((s.run.cert, s.certs, "certificate"),
                             (s.run.signal, s.signals, "signal")):
        if ref is not None and ref not in table:
            raise InputError(f"run references undefined {what} {ref!r}")
    lo = -s.run.horizon if s.run.two_sided else 0.0
    for mf in (s.A, s.B):
        if mf is not None:
            mf.check_finite(lo, s.run.horizon)
            if mf.parity != "none":
                mf.validate_parity(s.run.horizon)


# ------------------------------------------------------------------ serialize

def _fmt(x):
    return repr(float(x))


def serialize(s: Scenario) -> str:
    out = ["aeq-version = 1", f'name = "{s.name}"', f"dim = {s.dim}", ""]
    for label, mf in (("A", s.A), ("B", s.B)):
        if mf is not None:
            out.append(f"matrix {label} {{")
            if mf.parity != "none":
                out.append(f"  parity = {mf.parity}")
            for row in mf.entries:
                out.append("  row " + ", ".join(terms_to_str(e) for e in row))
            out.append("}")
            out.append("")
    if s.C is not None:
        out.append("matrix C {")
        for row in np.asarray(s.C):
            out.append("  row " + ", ".join(_fmt(v) for v in row))
        out.append("}")
        out.append("")
    if s.forcing is not None:
        out.append("forcing f {")
        for ft in s.forcing.terms:
            gain = "[" + ", ".join(
                "[" + ", ".join(_fmt(v) for v in row) + "]" for row in ft.gain) + "]"
            out.append(f"  term {terms_to_str(ft.scalar)} gain {gain}")
        out.append("}")
        out.append("")
    for cname in sorted(s.certs):
        c = s.certs[cname]
        k = "fit" if c.K is None else _fmt(c.K)
        out.append(f"cert {cname} {{ K = {k}, m = {c.m}, lambda = {_fmt(c.lam)}, "
                   f"t_star = {_fmt(c.t_star)} }}")
    if s.certs:
        out.append("")
    for sname in sorted(s.signals):
        sig = s.signals[sname]
        out.append(f"signal {sname} {{")
        for comp in sig.components:
            a = "[" + ", ".join(_fmt(v) for v in comp.a) + "]"
            b = "[" + ", ".join(_fmt(v) for v in comp.b) + "]"
            out.append(f"  component {{ omega = {_fmt(comp.omega)}, a = {a}, b = {b} }}")
        out.append("}")
        out.append("")
    out.append("run {")
    defaults = RunDirectives()
    for f in fields(RunDirectives):
        val = getattr(s.run, f.name)
        if val is None or val == getattr(defaults, f.name):
            continue
        if f.name == "two_sided":
            out.append(f"  two_sided = {'true' if val else 'false'}")
        elif f.name == "initial":
            rows = ", ".join("[" + ", ".join(_fmt(v) for v in vec) + "]" for vec in val)
            out.append(f"  initial = [{rows}]")
        elif f.name in ("u0", "classify_c"):
            out.append(f"  {f.name} = [" + ", ".join(_fmt(v) for v in val) + "]")
        elif f.name in ("cert", "signal"):
            out.append(f"  {f.name} = {val}")
        else:
            out.append(f"  {f.name} = {_fmt(val)}")
    out.append("}")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------- builtins

BUILTIN_NAMES = ("example1", "example2", "example3", "scalar_oracle")


def builtin(name: str, **params) -> Scenario:
    """Fully specified built-in scenarios with validated parameter ranges."""
    if name == "example1":
        return _example1(**params)
    if name == "example2":
        return _example2(**params)
    if name == "example3":
        return _example3(**params)
    if name == "scalar_oracle":
        return _scalar_oracle(**params)
    raise InputError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def _scalar_oracle(horizon=25.0):
    A = MatrixFunction.zero(1)
    B = MatrixFunction.from_terms([[(Term(1.0, rate=-1.0),)]])
    cert = TailCertificate(K=1.0, m=0, lam=1.0, t_star=0.0)
    run = RunDirectives(horizon=horizon, tol=1e-8, initial=[[1.0]], cert="P")
    return Scenario(name="scalar_oracle", dim=1, A=A, B=B,
                    certs={"P": cert}, run=run)


def _example1(k1=1.0, alpha=3.0, horizon=20.0, margin=0.5):
    if k1 <= 0:
        raise InputError("example1 requires K1 > 0")
    if alpha <= 0:
        raise InputError("example1 requires alpha > 0")
    if alpha - margin <= 0:
        raise InputError("example1 requires alpha - margin > 0 so that the "
                         "fitted envelope K*exp(-(alpha - margin)*t) decays")
    A = MatrixFunction.from_terms([
        [(), (Term(1.0),)],
        [(Term(2.0, power=-2),), ()],
    ])
    B = MatrixFunction.from_terms([
        [(), ()],
        [(Term(k1, rate=-alpha),), ()],
    ])
    cert = TailCertificate(K=None, m=0, lam=alpha - margin, t_star=0.0)
    run = RunDirectives(horizon=horizon, tol=1e-8, check_tol=1e-4,
                        initial=[[1.0, 0.0], [0.0, 1.0], [1.0, 2.0]], cert="P")
    return Scenario(name="example1", dim=2, A=A, B=B, certs={"P": cert}, run=run)


def _example2(k1=1.0, alpha=1.0, beta=0.1, horizon=60.0, C=None):
    if k1 <= 0 or alpha <= 0:
        raise InputError("example2 requires K1 > 0 and alpha > 0")
    if beta <= 0:
        raise InputError("example2 requires beta > 0")
    if alpha - 2 * beta <= 0:
        raise InputError(
            f"example2 requires alpha - 2*beta > 0, got {alpha - 2 * beta:g}")
    pi = math.pi
    A = MatrixFunction.from_terms([
        [(), (Term(1.0),), (), (), ()],
        [(Term(-1.0),), (), (), (), ()],
        [(), (), (), (Term(pi),), ()],
        [(), (), (Term(-pi),), (), ()],
        [(), (), (), (), (Term(beta),)],
    ])
    C = np.eye(5) if C is None else np.asarray(C, dtype=float)
    if C.shape != (5, 5):
        raise InputError("example2 needs a 5x5 matrix C")
    rows = [[(Term(k1 * C[i, j], rate=-alpha),) if C[i, j] != 0.0 else ()
             for j in range(5)] for i in range(5)]
    B = MatrixFunction.from_terms(rows)
    cert = TailCertificate(K=None, m=0, lam=alpha - beta, t_star=0.0)
    # AP part of the solution family X(t)c for c = classify_c (fifth entry 0)
    c_mix = [1.0, 1.0, 1.0, 1.0, 0.0]
    signal = APSignal.build(5, [
        (1.0, (c_mix[0], c_mix[1], 0, 0, 0), (c_mix[1], -c_mix[0], 0, 0, 0)),
        (pi, (0, 0, c_mix[2], c_mix[3], 0), (0, 0, c_mix[3], -c_mix[2], 0)),
    ])
    run = RunDirectives(horizon=horizon, tol=1e-8, check_tol=1e-4, ap_tol=1e-3,
                        ap_horizon=min(20.0, horizon),
                        initial=[[1.0, 0, 0, 0, 0], [0, 1.0, 0, 0, 0],
                                 [0, 0, 1.0, 0, 0], [0, 0, 0, 1.0, 0]],
                        classify_c=c_mix, cert="P", signal="g")
    return Scenario(name="example2", dim=5, A=A, B=B, certs={"P": cert},
                    signals={"g": signal}, run=run)


def _example3(alpha=2.0, horizon=30.0, C=None):
    if alpha <= 0:
        raise InputError("example3 requires alpha > 0")
    A = MatrixFunction.from_terms([
        [(Term(1.0, trig="sin", freq=math.pi),), ()],
        [(), (Term(1.0, trig="sin", freq=math.sqrt(5)),)],
    ], parity="odd")
    C = np.array([[0.0, 0.0], [1.0, 0.0]]) if C is None else np.asarray(C, dtype=float)
    if C.shape != (2, 2):
        raise InputError("example3 needs a 2x2 matrix C")
    rows = [[(Term(C[i, j], rate=-alpha, rate_abs=True, trig="cos", freq=1.0),)
             if C[i, j] != 0.0 else () for j in range(2)] for i in range(2)]
    B = MatrixFunction.from_terms(rows, parity="even")
    cert = TailCertificate(K=None, m=0, lam=alpha, t_star=0.0)
    run = RunDirectives(horizon=horizon, tol=1e-8, check_tol=1e-3, two_sided=True,
                        initial=[[1.0, 0.0], [0.0, 1.0]], cert="P")
    return Scenario(name="example3", dim=2, A=A, B=B, certs={"P": cert}, run=run)

"""Registry of convex generators ``f`` with ``f(1) = 0``.

Each member carries hand-derived ``f'`` and ``f''`` together with the two
boundary limits needed for infinite-support cases:

* ``f0 = lim_{x->0+} f(x)``, which also equals ``lim (f(x) - x f'(x))``;
* ``fp_inf = lim_{x->inf} f'(x) = lim f(x)/x``.

Both may be ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Fn = Callable[[np.ndarray], np.ndarray]


def _times(c: float, v: float) -> float:
    """Product with the convention ``0 * inf = 0``."""
    return 0.0 if c == 0 else c * v


@dataclass(frozen=True)
class ConvexFunction:
    name: str
    params: dict
    f: Fn
    fp: Fn
    fpp: Fn
    f0: float
    fp_inf: float
    operator_convex: bool
    parts: tuple = field(default=(), repr=False)

    def eval_f(self, x):
        return self.f(np.asarray(x, dtype=float))

    def eval_fp(self, x):
        return self.fp(np.asarray(x, dtype=float))

    def eval_fpp(self, x):
        return self.fpp(np.asarray(x, dtype=float))

    @property
    def fpp_at_1(self) -> float:
        return float(self.fpp(np.array([1.0]))[0])

    @property
    def spec(self) -> str:
        """Registry string that :func:`parse_function` maps back to this member.

        Base parameters are flattened into the wrapper's list, so wrappers
        nested two deep with clashing parameter names are not representable.
        """
        items = []
        for k, v in self.params.items():
            if isinstance(v, ConvexFunction):
                base_name, _, base_body = v.spec.partition(":")
                items.append(f"base={base_name}")
                if base_body:
                    items.append(base_body)
            else:
                items.append(f"{k}={v!r}")
        return f"{self.name}:{','.join(items)}" if items else self.name


def kl() -> ConvexFunction:
    return ConvexFunction(
        "kl", {},
        f=lambda x: x * np.log(x),
        fp=lambda x: np.log(x) + 1.0,
        fpp=lambda x: 1.0 / x,
        f0=0.0, fp_inf=math.inf, operator_convex=True,
    )


def hellinger(alpha: float) -> ConvexFunction:
    """``(x^alpha - 1)/(alpha - 1)`` for ``alpha > 0``, ``alpha != 1``."""
    a = float(alpha)
    if a <= 0 or a == 1:
        raise ValueError(f"hellinger order must be positive and not 1, got {a}")
    return ConvexFunction(
        "hellinger", {"alpha": a},
        f=lambda x: (x**a - 1.0) / (a - 1.0),
        fp=lambda x: a * x ** (a - 1.0) / (a - 1.0),
        fpp=lambda x: a * x ** (a - 2.0),
        f0=1.0 / (1.0 - a),
        fp_inf=math.inf if a > 1 else 0.0,
        operator_convex=a <= 2,
    )


def chi2() -> ConvexFunction:
    return ConvexFunction(
        "chi2", {},
        f=lambda x: x * x - 1.0,
        fp=lambda x: 2.0 * x,
        fpp=lambda x: np.full_like(x, 2.0, dtype=float),
        f0=-1.0, fp_inf=math.inf, operator_convex=True,
    )


def js() -> ConvexFunction:
    """Jensen-Shannon generator; both boundary limits equal ``ln 2 / 2``."""
    return ConvexFunction(
        "js", {},
        f=lambda x: 0.5 * (1 + x) * np.log(2 / (1 + x)) + 0.5 * x * np.log(x),
        fp=lambda x: 0.5 * np.log(2 * x / (1 + x)),
        fpp=lambda x: 0.5 / (x * (1 + x)),
        f0=0.5 * math.log(2), fp_inf=0.5 * math.log(2), operator_convex=True,
    )


def lecam(lam: float) -> ConvexFunction:
    """``lam (1-lam) (x-1)^2 / (lam x + 1 - lam)`` for ``lam`` in ``[0, 1]``."""
    l = float(lam)
    if not 0 <= l <= 1:
        raise ValueError(f"lecam parameter must lie in [0, 1], got {l}")
    c = l * (1 - l)
    return ConvexFunction(
        "lecam", {"lambda": l},
        f=lambda x: c * (x - 1) ** 2 / (l * x + 1 - l),
        fp=lambda x: (1 - l) * (1 - 1 / (l * x + 1 - l) ** 2) if l > 0 else 0.0 * x,
        fpp=lambda x: 2 * c / (l * x + 1 - l) ** 3,
        f0=l if l < 1 else 0.0,
        fp_inf=1 - l if l > 0 else 0.0,
        operator_convex=True,
    )


def linear(b: float) -> ConvexFunction:
    """``b (x - 1)``; generates the zero divergence."""
    bb = float(b)
    return ConvexFunction(
        "linear", {"b": bb},
        f=lambda x: bb * (x - 1),
        fp=lambda x: np.full_like(x, bb, dtype=float),
        fpp=lambda x: np.zeros_like(x, dtype=float),
        f0=-bb, fp_inf=bb, operator_convex=True,
    )


def skew(base: ConvexFunction, lam: float, mu: float) -> ConvexFunction:
    """``u [mu f(1/u) + (1-mu) f(x/u)]`` with ``u = 1 - lam + lam x``."""
    l, m = float(lam), float(mu)
    if not (0 <= l <= 1 and 0 <= m <= 1):
        raise ValueError("skew parameters must lie in [0, 1]")
    f, fp, fpp = base.f, base.fp, base.fpp

    def u(x):
        return 1 - l + l * x

    def F(x):
        ux = u(x)
        out = np.zeros_like(ux)
        if m:
            out = out + m * f(1 / ux)
        if m != 1:
            out = out + (1 - m) * f(x / ux)
        return ux * out

    def Fp(x):
        ux = u(x)
        out = np.zeros_like(ux)
        if m:
            out = out + l * m * (f(1 / ux) - fp(1 / ux) / ux)
        if m != 1:
            out = out + (1 - m) * (l * f(x / ux) + (1 - l) * fp(x / ux) / ux)
        return out

    def Fpp(x):
        ux = u(x)
        out = np.zeros_like(ux)
        if m:
            out = out + m * l**2 * fpp(1 / ux)
        if m != 1:
            out = out + (1 - m) * (1 - l) ** 2 * fpp(x / ux)
        return out / ux**3

    if l < 1:
        f0 = (1 - l) * (_times(m, float(f(np.array([1 / (1 - l)]))[0])) + _times(1 - m, base.f0))
    else:
        f0 = _times(m, base.fp_inf)
    if l > 0:
        fp_inf = l * (_times(m, base.f0) + _times(1 - m, float(f(np.array([1 / l]))[0])))
    else:
        fp_inf = _times(1 - m, base.fp_inf)
    return ConvexFunction(
        "skew", {"base": base, "lambda": l, "mu": m},
        f=F, fp=Fp, fpp=Fpp, f0=f0, fp_inf=fp_inf,
        operator_convex=base.operator_convex, parts=(base,),
    )


def depol_pullback(base: ConvexFunction, p: float) -> ConvexFunction:
    """``x -> f((1-p) x + p)``."""
    q = float(p)
    if not 0 <= q <= 1:
        raise ValueError(f"p must lie in [0, 1], got {q}")
    f, fp, fpp = base.f, base.fp, base.fpp
    return ConvexFunction(
        "depol_pullback", {"base": base, "p": q},
        f=lambda x: f((1 - q) * x + q),
        fp=lambda x: (1 - q) * fp((1 - q) * x + q),
        fpp=lambda x: (1 - q) ** 2 * fpp((1 - q) * x + q),
        f0=float(f(np.array([q]))[0]) if q > 0 else base.f0,
        fp_inf=_times(1 - q, base.fp_inf),
        operator_convex=base.operator_convex, parts=(base,),
    )


def conj(base: ConvexFunction) -> ConvexFunction:
    """Star conjugate ``g(t) = t f(1/t)``, so that ``D_g(rho||sigma) = D_f(sigma||rho)``."""
    f, fp, fpp = base.f, base.fp, base.fpp
    return ConvexFunction(
        "conj", {"base": base},
        f=lambda t: t * f(1 / t),
        fp=lambda t: f(1 / t) - fp(1 / t) / t,
        fpp=lambda t: fpp(1 / t) / t**3,
        f0=base.fp_inf, fp_inf=base.f0,
        operator_convex=base.operator_convex, parts=(base,),
    )


def combine(terms: list[tuple[float, ConvexFunction]]) -> ConvexFunction:
    """Non-negative linear combination ``sum_i c_i f_i``."""
    if not terms or any(c < 0 for c, _ in terms):
        raise ValueError("need at least one term with non-negative coefficients")
    cs = [float(c) for c, _ in terms]
    fs = [g for _, g in terms]
    return ConvexFunction(
        "combine", {},
        f=lambda x: sum(c * g.f(x) for c, g in zip(cs, fs)),
        fp=lambda x: sum(c * g.fp(x) for c, g in zip(cs, fs)),
        fpp=lambda x: sum(c * g.fpp(x) for c, g in zip(cs, fs)),
        f0=sum(_times(c, g.f0) for c, g in zip(cs, fs)),
        fp_inf=sum(_times(c, g.fp_inf) for c, g in zip(cs, fs)),
        operator_convex=all(g.operator_convex for g in fs), parts=tuple(fs),
    )


# name -> (constructor, ordered parameter names, whether a base function is taken)
REGISTRY: dict[str, tuple[Callable, tuple[str, ...], bool]] = {
    "kl": (kl, (), False),
    "hellinger": (hellinger, ("alpha",), False),
    "chi2": (chi2, (), False),
    "js": (js, (), False),
    "lecam": (lecam, ("lambda",), False),
    "linear": (linear, ("b",), False),
    "skew": (skew, ("lambda", "mu"), True),
    "depol_pullback": (depol_pullback, ("p",), True),
    "conj": (conj, (), True),
}


class UnknownFunctionError(KeyError):
    def __str__(self):
        return self.args[0]


def parse_function(spec: str) -> ConvexFunction:
    """Build a registry member from ``name`` or ``name:key=value,...``.

    Members taking a base function read it from ``base=<name>``; any keys the
    wrapper does not use are forwarded to the base, e.g.
    ``skew:base=hellinger,alpha=2,lambda=0.5,mu=0.5``.
    """
    name, _, body = spec.strip().partition(":")
    if name not in REGISTRY:
        raise UnknownFunctionError(
            f"unknown function {name!r}; valid names: {', '.join(sorted(REGISTRY))}"
        )
    kwargs: dict[str, str] = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"malformed parameter {item!r} in {spec!r}")
        kwargs[key.strip()] = val.strip()
    ctor, names, takes_base = REGISTRY[name]
    args = []
    if takes_base:
        base_name = kwargs.pop("base", None)
        if base_name is None:
            raise ValueError(f"{name} requires base=<function>")
        own = {k: kwargs.pop(k) for k in names if k in kwargs}
        rest = ",".join(f"{k}={v}" for k, v in kwargs.items())
        args.append(parse_function(f"{base_name}:{rest}" if rest else base_name))
        kwargs = own
    missing = [k for k in names if k not in kwargs]
    extra = [k for k in kwargs if k not in names]
    if missing or extra:
        raise ValueError(f"{name} expects parameters {list(names)}, got {sorted(kwargs)}")
    args.extend(float(kwargs[k]) for k in names)
    return ctor(*args)

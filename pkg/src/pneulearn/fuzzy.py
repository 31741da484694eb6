"""Fuzzy PD feedback: five symmetric triangular sets per variable, a fixed
5x5 rule table, product inference with center-average defuzzification.

Membership geometry is generated from one scaling factor and one deforming
coefficient per variable: the scaling factor places the outer centers inside
the universe, the deforming coefficient slides the inner centers toward or
away from them.  Those six numbers are the genome the tuner searches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LABELS = ("NL", "NS", "Z", "PS", "PL")

# consequent label index for premise (error row, error-difference column)
RULE_TABLE = (
    (0, 0, 0, 1, 2),
    (0, 0, 1, 2, 3),
    (0, 1, 2, 3, 4),
    (1, 2, 3, 4, 4),
    (2, 3, 4, 4, 4),
)

SF_BOUNDS = (0.1, 1.0)
DC_BOUNDS = (0.5, 0.999)

GENE_NAMES = ("S_I1", "S_I2", "S_O1", "D_I1", "D_I2", "D_O1")


@dataclass(frozen=True)
class SfDcGenes:
    """Three scaling factors and three deforming coefficients (inputs 1, 2, output)."""

    S_I1: float
    S_I2: float
    S_O1: float
    D_I1: float
    D_I2: float
    D_O1: float

    def __post_init__(self):
        for name in GENE_NAMES[:3]:
            v = getattr(self, name)
            if not SF_BOUNDS[0] <= v <= SF_BOUNDS[1]:
                raise ValueError(f"{name}={v} outside scaling-factor bounds {SF_BOUNDS}")
        for name in GENE_NAMES[3:]:
            v = getattr(self, name)
            if not DC_BOUNDS[0] <= v <= DC_BOUNDS[1]:
                raise ValueError(f"{name}={v} outside deforming-coefficient bounds {DC_BOUNDS}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in GENE_NAMES])

    @classmethod
    def from_array(cls, genes) -> "SfDcGenes":
        return cls(*(float(g) for g in genes))

    def to_dict(self) -> dict:
        return {n: getattr(self, n) for n in GENE_NAMES}


@dataclass(frozen=True)
class MembershipSet:
    """Five odd-symmetric centers on [-U, U] with triangular memberships.

    Adjacent centers are the triangle feet, so degrees at any point sum to 1;
    beyond the outer centers the outer label saturates at degree 1.
    """

    centers: np.ndarray
    universe_bound: float
    labels: tuple = LABELS

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        object.__setattr__(self, "centers", c)
        if c.shape != (5,):
            raise ValueError("need exactly five centers")
        if np.any(np.diff(c) <= 0):
            raise ValueError(f"centers must be strictly increasing, got {c}")
        if c[2] != 0.0 or c[0] != -c[4] or c[1] != -c[3]:
            raise ValueError(f"centers must be odd-symmetric about 0, got {c}")
        if self.universe_bound <= 0 or np.max(np.abs(c)) > self.universe_bound:
            raise ValueError("centers must lie inside the positive universe bound")

    @classmethod
    def from_genes(cls, scale: float, deform: float, universe: float) -> "MembershipSet":
        outer = scale * universe
        inner = deform * outer
        return cls(np.array([-outer, -inner, 0.0, inner, outer]), universe)

    def degrees(self, x: float) -> np.ndarray:
        """Triangular membership degrees at x (clamped to the universe)."""
        x = min(max(x, -self.universe_bound), self.universe_bound)
        c = self.centers
        out = np.zeros(5)
        if x <= c[0]:
            out[0] = 1.0
        elif x >= c[4]:
            out[4] = 1.0
        else:
            k = int(np.searchsorted(c, x, side="right")) - 1
            k = min(max(k, 0), 3)
            r = (x - c[k]) / (c[k + 1] - c[k])
            out[k] = 1.0 - r
            out[k + 1] = r
        return out


@dataclass(frozen=True)
class FuzzyPdConfig:
    """Membership sets for both inputs and the output, plus the rule table."""

    input_e: MembershipSet
    input_de: MembershipSet
    output: MembershipSet
    rules: tuple = RULE_TABLE

    def __post_init__(self):
        rules = tuple(tuple(int(v) for v in row) for row in self.rules)
        object.__setattr__(self, "rules", rules)
        if len(rules) != 5 or any(len(row) != 5 for row in rules):
            raise ValueError("rule table must be 5x5")
        if any(not 0 <= v <= 4 for row in rules for v in row):
            raise ValueError("rule consequents must be label indices 0..4")


def build_memberships(genes: SfDcGenes, U_e: float, U_de: float,
                      U_out: float, rules=RULE_TABLE) -> FuzzyPdConfig:
    """Shape all three membership sets from the six-gene chromosome."""
    for name, U in (("U_e", U_e), ("U_de", U_de), ("U_out", U_out)):
        if U <= 0:
            raise ValueError(f"{name} must be positive, got {U}")
    return FuzzyPdConfig(
        input_e=MembershipSet.from_genes(genes.S_I1, genes.D_I1, U_e),
        input_de=MembershipSet.from_genes(genes.S_I2, genes.D_I2, U_de),
        output=MembershipSet.from_genes(genes.S_O1, genes.D_O1, U_out),
        rules=rules)


def fuzzy_pd(e: float, de: float, cfg: FuzzyPdConfig) -> float:
    """Evaluate the controller surface at (error, error difference).

    Product AND over the premise degrees, additive aggregation, weighted
    average over the consequent centers.  Because each input's degrees sum to
    one, the rule weights themselves sum to one and the surface is the
    bilinear blend of the rule-table centers: odd-symmetric, monotone in both
    inputs, and bounded by the outer output centers.
    """
    we = cfg.input_e.degrees(e)
    wd = cfg.input_de.degrees(de)
    c_out = cfg.output.centers
    num = 0.0
    den = 0.0
    for i in range(5):
        wi = we[i]
        if wi == 0.0:
            continue
        row = cfg.rules[i]
        for j in range(5):
            wj = wd[j]
            if wj == 0.0:
                continue
            w = wi * wj
            num += w * c_out[row[j]]
            den += w
    return num / den


def delta_error(e_now: float, e_prev: float) -> float:
    """First backward difference; the sample period is absorbed into the
    error-difference scaling factor rather than divided out here."""
    return e_now - e_prev

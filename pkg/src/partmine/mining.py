"""Frequent-itemset mining over a transaction database.

`apriori` is the production miner (level-wise candidate generation with
anti-monotone pruning, exact support counting).  `brute_force_mine` is a
deliberately naive exhaustive miner kept as a verification oracle for small
universes; the two must agree exactly.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations

from .errors import InvalidBeta, ItemOutOfRange, UniverseTooLarge
from .transactions import TransactionDB

_ORACLE_MAX_UNIVERSE = 20


@dataclass(frozen=True)
class PatternSet:
    """Frequent itemsets with exact supports for one beta threshold."""

    beta: float
    max_len: int
    patterns: tuple[tuple[tuple[int, ...], float], ...]

    @property
    def itemsets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(p for p, _ in self.patterns)

    def items(self) -> frozenset[int]:
        """Union of all items appearing in any mined pattern."""
        return frozenset(i for p, _ in self.patterns for i in p)


def support(db: TransactionDB, itemset) -> float:
    """Fraction of transactions containing the itemset (exact)."""
    items = frozenset(int(i) for i in itemset)
    for i in items:
        if not 0 <= i < db.universe_size:
            raise ItemOutOfRange(f"item {i} outside universe [0, {db.universe_size})")
    if db.n == 0:
        raise ItemOutOfRange("empty database has no support denominator")
    hits = sum(1 for t in db.transactions if items.issubset(t))
    return hits / db.n


def _meets(count: int, n: int, beta: float, strict: bool) -> bool:
    s = count / n
    return s > beta if strict else s >= beta


def _canonical(found: dict[tuple[int, ...], float], beta, max_len) -> PatternSet:
    ordered = sorted(found.items(), key=lambda kv: (len(kv[0]), kv[0]))
    return PatternSet(beta=beta, max_len=max_len, patterns=tuple(ordered))


def _join_candidates(level: list[tuple[int, ...]], known: set) -> list[tuple[int, ...]]:
    """Join k-itemsets sharing a (k-1)-prefix, pruning by anti-monotonicity."""
    out = []
    by_prefix: dict[tuple[int, ...], list[int]] = {}
    for itemset in level:
        by_prefix.setdefault(itemset[:-1], []).append(itemset[-1])
    for prefix, lasts in by_prefix.items():
        lasts.sort()
        for a, b in combinations(lasts, 2):
            cand = prefix + (a, b)
            if all(sub in known for sub in combinations(cand, len(cand) - 1)):
                out.append(cand)
    return out


def apriori(db: TransactionDB, beta: float, max_len: int = 3, strict: bool = False) -> PatternSet:
    """Exactly the itemsets of size <= max_len whose support meets beta.

    Level-wise Apriori: candidates for level k are joins of frequent (k-1)
    itemsets, counted in one pass over the transactions.  `strict` switches
    the comparison from >= beta to > beta.
    """
    if not 0 < beta <= 1:
        raise InvalidBeta(f"beta must be in (0, 1], got {beta}")
    if max_len < 1:
        raise InvalidBeta(f"max_len must be >= 1, got {max_len}")
    n = db.n
    found: dict[tuple[int, ...], float] = {}
    if n == 0:
        return _canonical(found, beta, max_len)

    singles = Counter(i for t in db.transactions for i in t)
    level = sorted((i,) for i, c in singles.items() if _meets(c, n, beta, strict))
    for itemset in level:
        found[itemset] = singles[itemset[0]] / n

    k = 2
    while level and k <= max_len:
        candidates = _join_candidates(level, set(level))
        if not candidates:
            break
        counts = dict.fromkeys(candidates, 0)
        live = {i for c in candidates for i in c}
        # one pass over the transactions; identical filtered transactions are
        # counted once with a multiplicity
        filtered = Counter()
        for t in db.transactions:
            ft = tuple(i for i in t if i in live)
            if len(ft) >= k:
                filtered[ft] += 1
        for ft, mult in filtered.items():
            for sub in combinations(ft, k):
                if sub in counts:
                    counts[sub] += mult
        level = sorted(c for c, cnt in counts.items() if _meets(cnt, n, beta, strict))
        for itemset in level:
            found[itemset] = counts[itemset] / n
        k += 1
    return _canonical(found, beta, max_len)


def brute_force_mine(db: TransactionDB, beta: float, max_len: int = 3, strict: bool = False) -> PatternSet:
    """Enumerate every itemset over the universe and keep the frequent ones.

    Exponential on purpose; refuses universes larger than 20 items.
    """
    if not 0 < beta <= 1:
        raise InvalidBeta(f"beta must be in (0, 1], got {beta}")
    if db.universe_size > _ORACLE_MAX_UNIVERSE:
        raise UniverseTooLarge(
            f"universe of {db.universe_size} items exceeds oracle guard {_ORACLE_MAX_UNIVERSE}"
        )
    n = db.n
    found: dict[tuple[int, ...], float] = {}
    if n == 0:
        return _canonical(found, beta, max_len)
    sets = [frozenset(t) for t in db.transactions]
    for k in range(1, max_len + 1):
        for cand in combinations(range(db.universe_size), k):
            cnt = sum(1 for s in sets if s.issuperset(cand))
            if _meets(cnt, n, beta, strict):
                found[cand] = cnt / n
    return _canonical(found, beta, max_len)


def serialize_patterns(ps: PatternSet) -> str:
    """Line format: support<TAB>item item ...; supports with 9 significant digits."""
    lines = [f"{supp:.9g}\t{' '.join(str(i) for i in items)}" for items, supp in ps.patterns]
    return "\n".join(lines) + ("\n" if lines else "")

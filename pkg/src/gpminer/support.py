"""
gpminer Support Module

Support measures and their aggregation. Count support is a plain integer
(aggregation is addition). Domain support keeps, per canonical pattern
position, the set of distinct graph vertices mapped there; its value is the
minimum image-based (MNI) support, the smallest domain size.

Reported MNI keys each embedding by its own canonical mapping. The closed
variant also counts every automorphic image of that mapping; it never falls
below the reported value and never grows when a pattern is extended, so it
is the one frequent pattern mining prunes on.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Set, Tuple, Union

from .embedding import Embedding
from .pattern import CanonicalPattern, PositionMap, automorphisms

logger = logging.getLogger(__name__)


@dataclass
class DomainSupport:
    """One vertex set per pattern position."""
    domains: Tuple[Set[int], ...]

    @classmethod
    def empty(cls, num_positions: int) -> "DomainSupport":
        return cls(tuple(set() for _ in range(num_positions)))

    @classmethod
    def of(cls, *domains) -> "DomainSupport":
        return cls(tuple(set(d) for d in domains))

    def __len__(self) -> int:
        return len(self.domains)

    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(d) for d in self.domains)

    def permuted(self, position_map: PositionMap) -> "DomainSupport":
        """Move domain i to position position_map.perm[i]."""
        if len(position_map) != len(self.domains):
            raise ValueError(
                f"position map has {len(position_map)} positions, support has {len(self.domains)}"
            )
        moved = [set() for _ in self.domains]
        for i, domain in enumerate(self.domains):
            moved[position_map.perm[i]] = set(domain)
        return DomainSupport(tuple(moved))

    def update(self, other: "DomainSupport") -> "DomainSupport":
        """In-place union with other; returns self."""
        _check_arity(self, other)
        for mine, theirs in zip(self.domains, other.domains):
            mine |= theirs
        return self

    def closed(self, perms: Sequence[Tuple[int, ...]]) -> "DomainSupport":
        """Union of the domains moved by every permutation in perms."""
        result = [set() for _ in self.domains]
        for perm in perms:
            if len(perm) != len(self.domains):
                raise ValueError(
                    f"permutation has {len(perm)} positions, support has {len(self.domains)}"
                )
            for i, domain in enumerate(self.domains):
                result[perm[i]] |= domain
        return DomainSupport(tuple(result))

    def covers(self, other: "DomainSupport") -> bool:
        """True iff every domain is a superset of the matching domain of other."""
        _check_arity(self, other)
        return all(mine >= theirs for mine, theirs in zip(self.domains, other.domains))


Support = Union[int, DomainSupport]


def _check_arity(a: DomainSupport, b: DomainSupport) -> None:
    if len(a) != len(b):
        raise ValueError(f"cannot combine supports with {len(a)} and {len(b)} domains")


def domain_support(emb: Embedding, position_map: PositionMap) -> DomainSupport:
    """Singleton domains of one embedding, keyed by canonical position."""
    if len(emb) != len(position_map):
        raise ValueError(
            f"embedding has {len(emb)} vertices, position map has {len(position_map)}"
        )
    domains = [set() for _ in emb.vertices]
    for i, v in enumerate(emb.vertices):
        domains[position_map.perm[i]].add(v)
    return DomainSupport(tuple(domains))


def merge_domain(a: DomainSupport, b: DomainSupport) -> DomainSupport:
    """Position-wise union; neither argument is modified."""
    _check_arity(a, b)
    return DomainSupport(tuple(x | y for x, y in zip(a.domains, b.domains)))


def mni(support: DomainSupport) -> int:
    """Minimum domain cardinality."""
    if not support.domains:
        raise ValueError("MNI of a support without domains")
    return min(len(d) for d in support.domains)


def closed_mni(support: DomainSupport, pattern: CanonicalPattern) -> int:
    """MNI over all isomorphisms onto the pattern (domains closed under its automorphisms)."""
    value = mni(support.closed(automorphisms(pattern)))
    if value != mni(support):
        logger.debug("closed MNI of %s is %d, canonical mapping gives %d",
                     pattern.to_text(), value, mni(support))
    return value


def support_value(support: Support) -> int:
    """Reportable number for any support type."""
    if isinstance(support, DomainSupport):
        return mni(support)
    return int(support)

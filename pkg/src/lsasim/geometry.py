"""Flat 2D polygon helpers for zone geometry (meters, closed regions)."""

from typing import Sequence

Point = tuple[float, float]


def _orient(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    """p collinear with segment ab and within its bounding box."""
    if _orient(a, b, p) != 0.0:
        return False
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Closed-segment intersection, including touching and collinear overlap."""
    o1 = _orient(a, b, c)
    o2 = _orient(a, b, d)
    o3 = _orient(c, d, a)
    o4 = _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    return (
        _on_segment(c, a, b)
        or _on_segment(d, a, b)
        or _on_segment(a, c, d)
        or _on_segment(b, c, d)
    )


def point_in_polygon(p: Point, ring: Sequence[Point]) -> bool:
    """Closed containment: a point on an edge or vertex counts as inside."""
    n = len(ring)
    for i in range(n):
        if _on_segment(p, ring[i], ring[(i + 1) % n]):
            return True
    # crossing-number parity on edges strictly crossing the horizontal ray
    inside = False
    x, y = p
    for i in range(n):
        (x1, y1), (x2, y2) = ring[i], ring[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x_cross > x:
                inside = not inside
    return inside


def polygons_intersect(ring_a: Sequence[Point], ring_b: Sequence[Point]) -> bool:
    """Closed-region overlap: shared boundary points count as intersecting."""
    na, nb = len(ring_a), len(ring_b)
    for i in range(na):
        a1, a2 = ring_a[i], ring_a[(i + 1) % na]
        for j in range(nb):
            if segments_intersect(a1, a2, ring_b[j], ring_b[(j + 1) % nb]):
                return True
    return point_in_polygon(ring_a[0], ring_b) or point_in_polygon(ring_b[0], ring_a)


def is_simple_polygon(ring: Sequence[Point]) -> bool:
    """True when no two non-adjacent edges intersect and no edge degenerates."""
    n = len(ring)
    if n < 3:
        return False
    edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
    for (a, b) in edges:
        if a == b:
            return False
    for i in range(n):
        for j in range(i + 1, n):
            # adjacent edges share exactly one endpoint; skip them
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def centroid(ring: Sequence[Point]) -> Point:
    """Area centroid of a simple polygon (vertex mean for degenerate area)."""
    area2 = 0.0
    cx = 0.0
    cy = 0.0
    n = len(ring)
    for i in range(n):
        (x1, y1), (x2, y2) = ring[i], ring[(i + 1) % n]
        cross = x1 * y2 - x2 * y1
        area2 += cross
        cx += (x1 + x2) * cross
        cy += (y1 + y2) * cross
    if area2 == 0.0:
        return (sum(x for x, _ in ring) / n, sum(y for _, y in ring) / n)
    return (cx / (3.0 * area2), cy / (3.0 * area2))

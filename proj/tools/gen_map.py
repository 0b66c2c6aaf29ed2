#!/usr/bin/env python3
"""Generate the city map documents used by the simulator.

Layout: a street grid with one street every BLOCK tiles (a 500 m block at
25 m/tile). Streets are walkable and carry the vehicle highway; buildings sit
inside blocks with a short corridor connecting the interior to the street.
"""

import argparse

BLOCK = 20


class Grid:
    def __init__(self, blocks_x, blocks_y):
        self.w = blocks_x * BLOCK + 1
        self.h = blocks_y * BLOCK + 1
        self.walk = [[False] * self.w for _ in range(self.h)]
        self.high = [[False] * self.w for _ in range(self.h)]
        self.zebra = [[False] * self.w for _ in range(self.h)]
        self.pmv = [[False] * self.w for _ in range(self.h)]
        self.bus = [[False] * self.w for _ in range(self.h)]
        self.bldg = [['.'] * self.w for _ in range(self.h)]
        self.venues = []       # (id, category, building, open_start, open_close, [(x,y)...])
        self.bus_routes = []   # [[(x,y), ...]]
        for y in range(self.h):
            for x in range(self.w):
                if x % BLOCK == 0 or y % BLOCK == 0:
                    self.walk[y][x] = True
                    self.high[y][x] = True
                if x % BLOCK == 0 and y % BLOCK == 0:
                    self.zebra[y][x] = True

    def add_building(self, bx, by, char):
        """Carve a 15x15 interior with a corridor to the street above."""
        x0, y0 = bx * BLOCK + 3, by * BLOCK + 3
        x1, y1 = bx * BLOCK + 17, by * BLOCK + 17
        for y in range(y0, y1 + 1):
            for x in range(x0, x1 + 1):
                self.walk[y][x] = True
                self.bldg[y][x] = char
        door_x = bx * BLOCK + 10
        for y in range(by * BLOCK + 1, y0):
            self.walk[y][door_x] = True
        return (x0, y0, x1, y1)

    def add_venue(self, vid, category, char, rect, slot, open_start=0, open_close=1440):
        x0, y0, x1, y1 = rect
        per_row = (x1 - x0) // 2 + 1
        x = x0 + (slot % per_row) * 2
        y = y0 + (slot // per_row) * 2
        assert x <= x1 and y <= y1, f"venue slot {slot} outside building {char}"
        self.venues.append((vid, category, char, open_start, open_close, [(x, y)]))

    def emit(self):
        out = [f"map {self.w} {self.h}"]

        def layer(name, grid, render):
            out.append(f"layer {name}")
            for y in range(self.h):
                out.append(''.join(render(grid[y][x]) for x in range(self.w)))

        mark = lambda v: '#' if v else '.'
        layer("walkable", self.walk, mark)
        layer("highway", self.high, mark)
        layer("zebra", self.zebra, mark)
        layer("pmv", self.pmv, mark)
        layer("bus", self.bus, mark)
        layer("building", self.bldg, lambda c: c)
        for vid, cat, char, o0, o1, tiles in self.venues:
            tile_text = ';'.join(f"{x},{y}" for x, y in tiles)
            out.append(f"venue {vid} {cat} {char} {o0} {o1} {tile_text}")
        for route in self.bus_routes:
            out.append("busroute " + ' '.join(f"{x},{y}" for x, y in route))
        return '\n'.join(out) + '\n'


def default_map():
    g = Grid(5, 4)
    # Station infrastructure: PMV docks at every intersection, two bus lines
    # (one horizontal, one vertical) with stops at intersections, each listed
    # out-and-back so both directions are served.
    for y in range(0, g.h, BLOCK):
        for x in range(0, g.w, BLOCK):
            g.pmv[y][x] = True
    h_stops = [(x, 40) for x in range(0, g.w, BLOCK)]
    v_stops = [(40, y) for y in range(0, g.h, BLOCK)]
    for x, y in h_stops + v_stops:
        g.bus[y][x] = True
    g.bus_routes.append(h_stops + h_stops[-2::-1])
    g.bus_routes.append(v_stops + v_stops[-2::-1])

    chars = "ABCDEFGHIJKLMNOPQR"
    # 18 buildings over the 20 blocks (two central-ish blocks stay empty).
    blocks = [(bx, by) for by in range(4) for bx in range(5)]
    blocks.remove((2, 1))
    blocks.remove((2, 2))
    plan = [
        # (venue category, count, open_start, open_close) per building
        ("residential-room", 6, 0, 1440),   # A
        ("residential-room", 6, 0, 1440),   # B
        ("residential-room", 6, 0, 1440),   # C
        ("residential-room", 6, 0, 1440),   # D
        ("residential-room", 6, 0, 1440),   # E
        ("residential-room", 6, 0, 1440),   # F
        ("office", 4, 0, 1440),             # G
        ("office", 4, 0, 1440),             # H
        ("office", 4, 0, 1440),             # I
        ("canteen", 2, 600, 900),           # J
        ("restaurant", 3, 600, 1380),       # K
        ("cafe", 2, 360, 1260),             # L
        ("convenience-store", 3, 0, 1440),  # M
        ("store", 2, 540, 1260),            # N
        ("park", 2, 300, 1320),             # O
        ("hospital", 1, 420, 1260),         # P
        ("stadium", 1, 540, 1320),          # Q
        ("entertainment", 2, 600, 1440),    # R
    ]
    extra = [("sports", 2, 360, 1380)]  # shares the stadium building
    assert len(plan) == 18 and len(chars) == 18
    counters = {}
    for (bx, by), char, (cat, count, o0, o1) in zip(blocks, chars, plan):
        rect = g.add_building(bx, by, char)
        for i in range(count):
            n = counters.get(cat, 0)
            counters[cat] = n + 1
            g.add_venue(f"{cat}-{n:02d}", cat, char, rect, i, o0, o1)
        if char == 'Q':
            for cat, count, o0, o1 in extra:
                for i in range(count):
                    n = counters.get(cat, 0)
                    counters[cat] = n + 1
                    g.add_venue(f"{cat}-{n:02d}", cat, char, rect, 10 + i, o0, o1)
    total = sum(len([v for v in g.venues]) for _ in [0]) and len(g.venues)
    assert total == 68, f"expected 68 venues, got {total}"
    return g.emit()


def test_map():
    g = Grid(6, 6)
    for y in range(0, g.h, BLOCK):
        for x in range(0, g.w, BLOCK):
            g.pmv[y][x] = True
    stops = [(x, 60) for x in range(0, g.w, BLOCK)]
    for x, y in stops:
        g.bus[y][x] = True
    g.bus_routes.append(stops + stops[-2::-1])

    plan = [
        ((0, 0), 'A', "residential-room", 2, 0, 1440),
        ((5, 0), 'B', "residential-room", 2, 0, 1440),
        ((0, 5), 'C', "residential-room", 1, 0, 1440),
        ((5, 5), 'D', "residential-room", 1, 0, 1440),
        ((2, 1), 'E', "office", 2, 0, 1440),
        ((3, 4), 'F', "office", 1, 0, 1440),
        ((1, 2), 'G', "cafe", 1, 360, 1260),
        ((4, 2), 'H', "restaurant", 1, 600, 1380),
        ((2, 3), 'I', "park", 1, 300, 1320),
        ((4, 0), 'J', "store", 1, 540, 1260),
        ((1, 4), 'K', "convenience-store", 1, 0, 1440),
        ((0, 3), 'L', "hospital", 1, 420, 1260),
    ]
    counters = {}
    for (bx, by), char, cat, count, o0, o1 in plan:
        rect = g.add_building(bx, by, char)
        for i in range(count):
            n = counters.get(cat, 0)
            counters[cat] = n + 1
            g.add_venue(f"{cat}-{n:02d}", cat, char, rect, i, o0, o1)
    return g.emit()


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("kind", choices=["default", "test"])
    parser.add_argument("output")
    args = parser.parse_args()
    text = default_map() if args.kind == "default" else test_map()
    with open(args.output, "w") as f:
        f.write(text)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Generate the synthetic sensor-log and sales fixtures.

Seeded so the committed CSVs are reproducible:
    python3 gen_synthetic.py

vast_sensor.csv plants exactly three car-ids (out of 200) with an odd
number of entrance-gate check-ins; every other car enters and exits
cleanly (even count).
"""
import csv
import random
from datetime import datetime, timedelta

SEED = 20170501
OUT_SENSOR = "vast_sensor.csv"
OUT_SALES = "m5_sales.csv"

PLANTED = [523, 647, 751]  # odd entrance-gate check-in counts


def season_of(month):
    return {12: "Winter", 1: "Winter", 2: "Winter",
            3: "Spring", 4: "Spring", 5: "Spring",
            6: "Summer", 7: "Summer", 8: "Summer"}.get(month, "Fall")


def gen_sensor(rng):
    car_ids = list(range(500, 700))  # 200 cars
    assert all(c in car_ids for c in PLANTED[:2]) and PLANTED[2] == 751
    car_ids = car_ids[:-1] + [751]   # keep 200 distinct ids
    car_types = ["2-axle-car", "2-axle-truck", "3-axle-truck",
                 "4-axle-truck", "2-axle-ranger-truck", "ranger-truck"]
    other_gates = (["general-gate%d" % i for i in range(8)] +
                   ["camping%d" % i for i in range(6)] +
                   ["ranger-stop%d" % i for i in range(4)] +
                   ["ranger-base"])
    entrances = ["entrance%d" % i for i in range(5)]

    rows = []
    t0 = datetime(2015, 5, 1, 6, 0, 0)
    for cid in car_ids:
        ctype = rng.choice(car_types[:4] if cid % 7 else car_types[4:])
        n_entr = 2 * rng.randint(1, 3)
        if cid in PLANTED:
            n_entr += 1
        t = t0 + timedelta(minutes=rng.randint(0, 60 * 24 * 120))
        for _ in range(n_entr):
            rows.append((t, cid, ctype, rng.choice(entrances)))
            t += timedelta(minutes=rng.randint(30, 60 * 24))
        for _ in range(rng.randint(2, 8)):
            rows.append((t, cid, ctype, rng.choice(other_gates)))
            t += timedelta(minutes=rng.randint(5, 600))
    rows.sort(key=lambda r: (r[0], r[1]))

    with open(OUT_SENSOR, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Timestamp", "Car-id", "Car-type", "Gate-name",
                    "Hour", "Season", "Speed"])
        for t, cid, ctype, gate in rows:
            w.writerow([t.strftime("%Y-%m-%d %H:%M:%S"), cid, ctype, gate,
                        t.hour, season_of(t.month),
                        round(rng.uniform(8, 45), 1)])

    odd = {}
    for _, cid, _, gate in rows:
        if gate.startswith("entrance"):
            odd[cid] = odd.get(cid, 0) + 1
    planted = sorted(c for c, n in odd.items() if n % 2 == 1)
    assert planted == sorted(PLANTED), planted
    print("%s: %d rows, %d cars, odd entrance counts: %s"
          % (OUT_SENSOR, len(rows), len(car_ids), planted))


def gen_sales(rng):
    states = ["California", "New York", "Utah", "Maryland", "Texas"]
    depts = ["Clothing", "Bathroom", "Kitchen", "Garden"]
    categs = {"Clothing": "Apparel", "Bathroom": "Home",
              "Kitchen": "Home", "Garden": "Outdoor"}
    events = [("none", "none"), ("SNAP", "Government"), ("New Years Day", "Holiday"),
              ("Black Friday", "Shopping"), ("Super Bowl", "Sporting")]
    t0 = datetime(2015, 1, 1)
    with open(OUT_SALES, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Item", "Dept", "Categ", "Store", "State", "Date",
                    "Event", "Event-type", "SNAP", "Price", "Sales", "Season"])
        for i in range(400):
            dept = rng.choice(depts)
            state = rng.choice(states)
            ev, evt = rng.choice(events)
            day = t0 + timedelta(days=rng.randint(0, 364))
            price = round(rng.uniform(1, 120), 2)
            base = {"California": 55, "New York": 40, "Utah": 25,
                    "Maryland": 30, "Texas": 45}[state]
            sales = max(0, int(rng.gauss(base, 12)))
            w.writerow(["ITEM_%03d" % i, dept, categs[dept],
                        "%s_%d" % (state[:2].upper(), rng.randint(1, 3)),
                        state, day.strftime("%Y-%m-%d"), ev, evt,
                        str(ev == "SNAP").lower(), price, sales,
                        season_of(day.month)])
    print("%s: 400 rows" % OUT_SALES)


if __name__ == "__main__":
    rng = random.Random(SEED)
    gen_sensor(rng)
    gen_sales(rng)

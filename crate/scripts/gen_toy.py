#!/usr/bin/env python3
"""Generate the seeded E2E-style toy corpus under crates/core/data/toy/.

Human references sometimes leave a slot unrealized or paraphrase it, so the
first-stage model has coverage gaps worth repairing.
"""

import argparse
import random
from pathlib import Path

NAMES = [
    "Aromi", "Alimentum", "Bibimbap House", "Blue Spice", "Browns Cambridge",
    "Clowns", "Cocum", "Cotto", "Fitzbillies", "Giraffe", "Green Man",
    "Loch Fyne", "Midsummer House", "Strada", "Taste of Cambridge",
    "The Cambridge Blue", "The Cricketers", "The Dumpling Tree", "The Eagle",
    "The Golden Curry", "The Golden Palace", "The Mill", "The Olive Grove",
    "The Phoenix", "The Plough", "The Punter", "The Rice Boat", "The Twenty Two",
    "The Vaults", "The Waterman", "The Wrestlers", "Wildwood", "Zizzi",
]
NEAR = [
    "All Bar One", "Avalon", "Burger King", "Café Adriatic", "Café Brazil",
    "Café Rouge", "Café Sicilia", "Clare Hall", "Crowne Plaza Hotel",
    "Express by Holiday Inn", "Raja Indian Cuisine", "Rainbow Vegetarian Café",
    "Ranch", "The Bakers", "The Portland Arms", "The Six Bells", "The Sorrento",
    "Yippee Noodle Bar",
]
FOOD = ["Chinese", "English", "Fast food", "French", "Indian", "Italian", "Japanese"]
PRICE = ["cheap", "moderate", "high", "less than £20", "£20-25", "more than £30"]
RATING = ["low", "average", "high", "1 out of 5", "3 out of 5", "5 out of 5"]
AREA = ["city centre", "riverside"]
EAT = ["pub", "restaurant", "coffee shop"]
FAMILY = ["yes", "no"]

OPTIONAL = [
    ("eatType", EAT), ("food", FOOD), ("priceRange", PRICE),
    ("customer rating", RATING), ("area", AREA), ("familyFriendly", FAMILY),
    ("near", NEAR),
]


def make_table(rng):
    k = rng.randint(2, 7)
    chosen = sorted(rng.sample(range(len(OPTIONAL)), k))
    slots = [("name", rng.choice(NAMES))]
    slots += [(OPTIONAL[i][0], rng.choice(OPTIONAL[i][1])) for i in chosen]
    return slots


def mr(slots):
    return ", ".join(f"{n}[{v}]" for n, v in slots)


def price_clause(v, rng):
    numeric = any(c.isdigit() for c in v)
    if numeric:
        return rng.choice([f"prices are {v}", f"it has a price range of {v}"])
    return rng.choice([f"it has a {v} price range", f"prices are {v}"])


def realize(slots, rng, drop):
    t = dict(slots)
    name = t["name"]
    # a slot left out of the reference, or paraphrased away from its value
    keep = {n: (n == "name" or rng.random() > drop) for n in t}
    eat = t.get("eatType") if keep.get("eatType") else None
    food = t.get("food") if keep.get("food") else None

    if eat and food and rng.random() < 0.5:
        head = f"{name} is a {food} {eat}"
    elif eat:
        head = rng.choice([f"{name} is a {eat}", f"There is a {eat} called {name}"])
        if food:
            head += f" serving {food} food"
    elif food:
        head = rng.choice([f"{name} serves {food} food", f"{name} offers {food} food"])
    else:
        head = rng.choice([f"{name} is a place to eat", f"{name} is a venue"])

    clauses = []
    if "area" in t and keep["area"]:
        clauses.append(rng.choice([f"in the {t['area']}", f"in the {t['area']} area"]))
    if "near" in t and keep["near"]:
        clauses.append(f"near {t['near']}")
    first = head + ("" if not clauses else " " + " ".join(clauses)) + "."

    extra = []
    if "priceRange" in t and keep["priceRange"]:
        extra.append(price_clause(t["priceRange"], rng))
    if "customer rating" in t and keep["customer rating"]:
        v = t["customer rating"]
        extra.append(rng.choice([f"it has a {v} customer rating", f"customers rate it {v}"]))
    if "familyFriendly" in t:
        yes = t["familyFriendly"] == "yes"
        if keep["familyFriendly"]:
            extra.append("it is family friendly" if yes else "it is not family friendly")
        elif rng.random() < 0.5:
            extra.append("kids are welcome" if yes else "it is adults only")
    rng.shuffle(extra)
    rest = ""
    if extra:
        body = " and ".join(extra) if len(extra) <= 2 else ", ".join(extra[:-1]) + " and " + extra[-1]
        rest = " " + body[0].upper() + body[1:] + "."
    return first + rest


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20231)
    ap.add_argument("--train", type=int, default=100)
    ap.add_argument("--unlabeled", type=int, default=400)
    ap.add_argument("--test", type=int, default=200)
    ap.add_argument("--drop", type=float, default=0.2)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "crates/core/data/toy"))
    a = ap.parse_args()
    rng = random.Random(a.seed)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)

    seen = set()

    def fresh():
        while True:
            t = make_table(rng)
            key = mr(t)
            if key not in seen:
                seen.add(key)
                return t

    train = [fresh() for _ in range(a.train)]
    unlabeled = [fresh() for _ in range(a.unlabeled)]
    test = [fresh() for _ in range(a.test)]
    hdr = f"# toy E2E-style corpus, generated by scripts/gen_toy.py --seed {a.seed}\n"
    with open(out / "train.tsv", "w", encoding="utf-8") as f:
        f.write(hdr)
        for t in train:
            f.write(f"{mr(t)}\t{realize(t, rng, a.drop)}\n")
    with open(out / "unlabeled.txt", "w", encoding="utf-8") as f:
        f.write(hdr)
        for t in unlabeled:
            f.write(mr(t) + "\n")
    with open(out / "test.tsv", "w", encoding="utf-8") as f:
        f.write(hdr)
        for t in test:
            f.write(f"{mr(t)}\t{realize(t, rng, 0.0)}\n")


if __name__ == "__main__":
    main()

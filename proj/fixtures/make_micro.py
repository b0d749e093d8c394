"""Expands reference_counts.csv into one micro record per father-child pair."""
import csv
import sys

COHORTS = {"I": (1940, 1951), "II": (1952, 1965), "III": (1966, 1977)}

with open("reference_counts.csv") as f:
    rows = list(csv.DictReader(f))

out = csv.writer(sys.stdout, lineterminator="\n")
out.writerow(["birth_year", "father_class", "child_class"])
for label, (lo, hi) in COHORTS.items():
    k = 0
    for r in rows:
        if r["cohort"] != label:
            continue
        for _ in range(int(r["count"])):
            out.writerow([lo + k % (hi - lo + 1), r["father_class"], r["child_class"]])
            k += 1

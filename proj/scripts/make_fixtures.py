#!/usr/bin/env python3
"""Regenerates fixtures/: a 12-article corpus, a three-region gazetteer,
a synthetic firm file and a pipeline config. Output is deterministic."""

import csv
import json
import math
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"

REGIONS = [
    ("fes_meknes", "Morocco", "Fès-Meknès", ["Fès", "Fez", "Fes", "Fassi", "Fèz", "Fès-Meknès", "Meknes"]),
    ("casablanca_settat", "Morocco", "Casablanca-Settat", ["Casablanca-Settat", "Casablanca", "Settat"]),
    ("lagos", "Nigeria", "Lagos", ["Lagos", "Ikeja"]),
]

# Sentences per theme. Region articles draw different subsets so every
# region gets its own co-occurrence graph for every theme.
SENTENCES = {
    "land": [
        "Investors waited months for a title deed on industrial land near the ring road.",
        "The zoning board approved new plots for a logistics park.",
        "Land tenure disputes slowed the expansion of the free zone.",
        "Property prices on serviced plots rose after the airport upgrade.",
        "Farmers contested the expropriation of land for the new port.",
        "A landowner association asked for clearer land registry rules.",
    ],
    "labor": [
        "Factories reported a shortage of skilled workers in electronics.",
        "The union negotiated higher wages for textile workers.",
        "Hiring slowed as employment rules for temporary workers tightened.",
        "Training centres promised to raise workforce skills for car suppliers.",
        "Wage arrears triggered a strike among port workers.",
        "Employers said labor costs remained competitive despite the wage rise.",
    ],
    "trade": [
        "Exports of car parts climbed after the tariff cut.",
        "Customs delays at the port raised import costs for assemblers.",
        "A new trade agreement opened the European market to local textiles.",
        "Importers complained that tariffs on machinery hurt investment.",
        "The treaty removed customs duties on agricultural exports.",
        "Trade volumes through the dry port doubled in two years.",
    ],
    "taxation": [
        "The tax authority offered incentives to manufacturers in the free zone.",
        "Firms said VAT refunds arrived late and strained cash flow.",
        "A new levy on imported inputs raised fiscal revenue.",
        "Tax evasion by informal traders eroded the revenue base.",
        "Investors welcomed a five year tax holiday for exporters.",
        "The fiscal reform simplified taxes for small firms.",
    ],
    "justice": [
        "A commercial court ruled in favour of the foreign investor.",
        "Judges cleared a backlog of contract lawsuits.",
        "The prosecutor opened a case over bribes paid for permits.",
        "Legal reforms promised faster judicial review of disputes.",
        "Investors said court rulings on land disputes were unpredictable.",
        "The justice ministry trained judges in commercial law.",
    ],
}

FILLER = [
    "Officials expect more announcements next quarter.",
    "Analysts remain cautious about the outlook.",
    "The chamber of commerce hosted a forum on the subject.",
]


def corpus(rng):
    articles = []
    mention = {
        "fes_meknes": ["Fez", "Fès", "Fes", "Meknes"],
        "casablanca_settat": ["Casablanca", "Settat", "Casablanca", "Casablanca-Settat"],
        "lagos": ["Lagos", "Ikeja", "Lagos", "Lagos"],
    }
    n = 0
    for r, (region_id, _, _, _) in enumerate(REGIONS):
        for k in range(4):
            n += 1
            place = mention[region_id][k]
            themes = list(SENTENCES)
            rng.shuffle(themes)
            body = []
            for t in themes[: 3 + (k + r) % 3]:
                picks = rng.sample(SENTENCES[t], 2)
                body.append(f"In {place}, " + picks[0][0].lower() + picks[0][1:])
                body.append(picks[1])
            body.append(rng.choice(FILLER))
            if region_id == "lagos" and k == 3:
                body.append("Traders compared the port with Casablanca.")
            month = 1 + (n * 5) % 12
            articles.append({
                "id": f"a{n:02d}",
                "source": ["wire", "daily", "business"][n % 3],
                "published_at": f"{2014 + n % 6}-{month:02d}-{1 + n:02d}",
                "title": f"{place} business news {n}",
                "body": " ".join(body),
                "language": "eng",
                "top_traffic": True,
            })
    return articles


OBSTACLE_LABELS = ["Does Not Apply", "No obstacle", "Minor obstacle", "Moderate obstacle", "Major obstacle",
                   "Very severe obstacle"]
OBSTACLES = ["corruption", "crime_disorder", "business_license", "labor_regulation", "lack_education",
             "access_to_land", "access_to_finance", "transport", "telecom", "electricity"]
SECTORS = ["Manufacturing", "Retail", "Services", "Food"]


def firms(rng):
    header = ["firm_id", "country", "region_id", "sector", "survey_year", "years_established", "employees",
              "foreign_ownership"] + OBSTACLES + ["has_email_web"]
    rows = []
    sizes = {"fes_meknes": 80, "casablanca_settat": 120, "lagos": 100}
    fid = 0
    for region_id, country, _, _ in REGIONS:
        region_shift = {"fes_meknes": 0.3, "casablanca_settat": -0.2, "lagos": 0.6}[region_id]
        for i in range(sizes[region_id]):
            fid += 1
            sector = SECTORS[i % len(SECTORS)]
            cell = region_shift + 0.25 * SECTORS.index(sector)
            latent = {o: cell + rng.gauss(0, 1) for o in OBSTACLES}
            codes = {}
            for o in OBSTACLES:
                c = min(5, max(1, round(2.5 + latent[o])))
                if rng.random() < 0.03:
                    c = 0
                codes[o] = c
            u = rng.gauss(0, 1)
            fo_index = -0.9 - 0.4 * (codes["corruption"] - 3) - 0.3 * (codes["crime_disorder"] - 3) + u
            fo = 0.0 if fo_index < 0 else min(100.0, round(40 * fo_index, 1))
            row = {
                "firm_id": f"F{fid:04d}",
                "country": country,
                "region_id": region_id,
                "sector": sector,
                "survey_year": 2013 + fid % 7,
                "years_established": max(1, int(math.exp(rng.gauss(2.6, 0.7)))),
                "employees": max(2, int(math.exp(rng.gauss(3.2, 1.1)))),
                "foreign_ownership": fo,
                "has_email_web": "Yes" if rng.random() < 0.6 + 0.1 * (codes["telecom"] < 3) else "No",
            }
            for o in OBSTACLES:
                row[o] = OBSTACLE_LABELS[codes[o]] if rng.random() < 0.7 else str(codes[o])
            if fid % 37 == 0:
                row["employees"] = "NA"
            if fid % 53 == 0:
                row["access_to_land"] = "Don't Know (Spontaneous)"
            rows.append(row)
    # Two rows the loader must reject.
    bad = dict(rows[0], firm_id="F9001", corruption="Somewhat severe")
    worse = dict(rows[1], firm_id="F9002", foreign_ownership=140)
    rows += [bad, worse]
    return header, rows


def main():
    OUT.mkdir(exist_ok=True)
    rng = random.Random(20140101)

    with open(OUT / "corpus.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for a in corpus(rng):
            f.write(json.dumps(a, ensure_ascii=False) + "\n")

    with open(OUT / "gazetteer.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["region_id", "country", "canonical_name", "alias"])
        for region_id, country, name, aliases in REGIONS:
            for alias in aliases:
                w.writerow([region_id, country, name, alias])

    header, rows = firms(rng)
    with open(OUT / "firms.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.DictWriter(f, fieldnames=header, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)

    config = {
        "version": 1,
        "paths": {
            "corpus": "corpus.jsonl",
            "gazetteer": "gazetteer.csv",
            "themes": "../data/themes.json",
            "stopwords": "../data/stopwords_en.txt",
            "firms": "firms.csv",
            "output": "out",
        },
        "graph": {"window": 7, "min_weight": 1, "max_nodes": 5000, "granularity": "pooled"},
        "relevance": {"threshold": 0.15},
        "regression": {"models": "default", "instruments": "leave_out", "se": "hc1"},
        "montecarlo": {"enabled": True, "reps": 200, "n": 500, "beta": 2.0},
        "seed": 20140101,
    }
    with open(OUT / "config.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()

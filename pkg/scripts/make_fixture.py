#!/usr/bin/env python3
"""Generate the shipped 50-ad synthetic fixture corpus (deterministic).

Produces data/fixtures/ads_50.ndjson: 41 unique Dutch ad texts across four
fictional parties plus 9 duplicate-text ads (parties reuse copy), with
ranged metrics, joint gender x age demographic cells and region cells.
Rerunning reproduces the file byte-for-byte.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "fixtures" / "ads_50.ndjson"

PB = ("P100", "Partij Blauw")
PB2 = ("P101", "Partij Blauw")
GF = ("P200", "GroenFront")
VL = ("P300", "Volkslijst")
MU = ("P400", "Middenunie")

AGE_KEYS = ["13-17", "18-24", "25-34", "35-44", "45-54", "55-64", "65+"]
REGIONS = [
    ("Drenthe", 2.83), ("Flevoland", 2.45), ("Friesland", 3.73),
    ("Gelderland", 12.00), ("Groningen", 3.36), ("Limburg", 6.39),
    ("Noord-Brabant", 14.73), ("Noord-Holland", 16.53), ("Overijssel", 6.68),
    ("Utrecht", 7.79), ("Zeeland", 2.21), ("Zuid-Holland", 21.32),
]

SPEND_BUCKETS = [
    (0, 99), (100, 199), (200, 299), (300, 399), (400, 499),
    (500, 999), (1000, 1999), (2000, 2999), (3000, 3999), (5000, 9999),
]
IMPRESSION_BUCKETS = [
    (1000, 1999), (2000, 2999), (3000, 3999), (4000, 4999), (5000, 9999),
    (10000, 14999), (15000, 19999), (20000, 24999), (25000, 29999),
    (30000, 34999), (40000, 44999), (50000, 59999), (60000, 69999),
    (80000, 89999), (100000, 124999), (150000, 199999),
]
AUDIENCE_BUCKETS = [(100000, 500000), (500001, 1000000), (1000001, None)]

# (page, bodies, titles, descriptions, captions)
TEXTS = [
    # Partij Blauw: housing, economy, law & order, transport
    (PB, ["Te weinig woningen in Nederland. Wij bouwen nieuwe huizen voor starters en zorgen voor betaalbare huur."],
     ["Meer woningen"], ["Lees ons plan voor nieuwbouw."], ["partijblauw.nl"]),
    (PB, ["De woningnood raakt iedereen. Huurders en starters verdienen een eerlijke kans op een huis."],
     ["Woningnood aanpakken"], [], ["partijblauw.nl"]),
    (PB, ["Lagere belastingen voor het mkb. Ondernemers verdienen steun om te investeren in banen."],
     ["Steun het mkb"], [], []),
    (PB2, ["Onze economie heeft sterke bedrijven nodig. Minder belasting, meer koopkracht en winst voor iedereen."],
     [], ["Lees het economieplan van Partij Blauw."], []),
    (PB, ["Meer politie in de wijk. Veiligheid op straat, harde straf voor criminaliteit en drugs."],
     ["Veilige straten"], [], ["partijblauw.nl"]),
    (PB2, ["Agenten verdienen respect. Wij pakken misdaad en ondermijning aan met meer justitie."],
     [], [], []),
    (PB, ["Ons plan voor Nederland: meer woningen, huizen en nieuwbouw voor starters, lagere huur, "
          "een sterke economie met lagere belastingen voor ondernemers en het mkb, investeringen in "
          "bedrijven en koopkracht, veilige wijken met meer politie, goed onderwijs en betaalbare zorg."],
     ["Het hele verhaal"], ["Ons volledige programma in een minuut."], ["partijblauw.nl"]),
    (PB, ["Word lid van Partij Blauw! Kom naar onze digitale bijeenkomst en praat mee."],
     ["Word lid"], [], ["partijblauw.nl"]),
    (PB2, ["Tijd voor leiderschap. Stem 17 maart Partij Blauw."], [], [], []),
    (PB, ["Minder files, betere snelwegen en veilig verkeer. Ook de fiets krijgt ruimte."],
     ["Doorrijden"], [], []),
    (PB, ["Goede zorg en goed onderwijs, dat is onze belofte. Elke patiënt en elke leraar telt."],
     [], [], []),
    (PB2, ["Kernenergie is schone energie. Partij Blauw kiest voor een realistisch klimaat zonder hoge belasting."],
     ["Realistisch klimaat"], [], []),
    (PB, ["Werk moet lonen: lagere lasten op loon en een fatsoenlijk pensioen voor elke generatie."],
     [], [], []),
    # GroenFront: climate, agriculture, transport, housing
    (GF, ["Het klimaat kan niet wachten. Minder uitstoot, meer windmolens en zonnepanelen voor schone energie."],
     ["Klimaatplan"], ["Lees hoe wij de uitstoot halveren."], ["groenfront.nl"]),
    (GF, ["Kies voor natuur en milieu. Duurzaamheid is de toekomst, stop de klimaatverandering."],
     [], [], ["groenfront.nl"]),
    (GF, ["Stem 🗳️ GroenFront! Samen voor het klimaat 🌍 en minder CO2-uitstoot."], [], [], []),
    (GF, ["Boeren verdienen een eerlijke prijs. Minder mest, gezonde gewassen en een leefbaar platteland."],
     ["Voor de boer"], [], []),
    (GF, ["Landbouw en natuur kunnen samen. Steun de boer die kiest voor duurzame akkerbouw."],
     [], [], []),
    (GF, ["Meer treinen en trams, beter spoor. Pak de fiets en laat de auto staan."],
     ["Beter OV"], [], ["groenfront.nl"]),
    (GF, ["𝗦𝗰𝗵𝗼𝗻𝗲 𝗲𝗻𝗲𝗿𝗴𝗶𝗲 𝗻𝘂!"],
     [], ["Kernenergie is niet nodig: wind en zon leveren schone energie voor iedereen."], []),
    (GF, ["Doe mee met onze actiedag! Samen maken we het verschil. Meld je aan."],
     ["Actiedag"], [], ["groenfront.nl"]),
    (GF, ["Duurzame woningen voor iedereen: isoleer huizen, lagere huur en groene wijken."],
     ["Groen wonen"], [], []),
    # Volkslijst: healthcare, migration, social welfare, law & order
    (VL, ["De zorg verdient beter: meer verpleegkundigen, een eigen huisarts voor iedereen en betaalbare medicijnen."],
     ["Zorg voor elkaar"], [], ["volkslijst.nl"]),
    (VL, ["Wachtlijsten in het ziekenhuis en de ggz zijn onacceptabel. Elke patiënt telt, zorg is geen markt."],
     [], ["Lees ons zorgplan."], []),
    (VL, ["Grip op migratie: een streng maar eerlijk asielbeleid, kleinere azc en snelle integratie."],
     ["Grip op migratie"], [], []),
    (VL, ["Vluchtelingen verdienen opvang, maar de grens aan migratie is bereikt. Asielzoekers sneller duidelijkheid."],
     [], [], []),
    (VL, ["Verhoog het minimumloon en de aow. Geen kind in armoede, een vaste baan met eerlijk loon."],
     ["Eerlijk loon"], [], ["volkslijst.nl"]),
    (VL, ["Wie zijn werk verliest, verdient bijstand zonder wachttijd. Uitkeringen omhoog, pensioen op tijd."],
     [], [], []),
    (VL, ["Ons zorgplan: meer handen aan het bed in het ziekenhuis, hogere lonen voor verpleegkundigen en dokters, "
          "een huisarts in elke wijk, goedkopere medicijnen en vaccins voor patiënten, een hoger minimumloon en "
          "pensioen voor wie in de zorg werkt, en werk voor iedereen met een eerlijke uitkering en aow."],
     ["Het zorgplan"], ["Alle plannen voor de zorg op een rij."], ["volkslijst.nl"]),
    (VL, ["Tijd voor verandering. Doe mee!"], [], [], []),
    (VL, ["Veiligheid in elke buurt: meer agenten op straat en aanpak van drugs bij scholen."],
     ["Veilige buurten"], [], []),
    # Middenunie: education, government, foreign affairs, civil rights, defense
    (MU, ["Investeer in onderwijs: kleinere klassen, meer leraren en gratis bibliotheken. Verlaag het collegegeld."],
     ["Onderwijsplan"], [], ["middenunie.nl"]),
    (MU, ["Elke student een kans: betaalbare kamers, goede docenten en sterke universiteiten. Kunst en cultuur voor iedereen."],
     [], [], []),
    (MU, ["Een transparante overheid begint met een nieuwe bestuurscultuur. Minder achterkamertjes, meer democratie en een eerlijk referendum."],
     ["Nieuw bestuur"], [], ["middenunie.nl"]),
    (MU, ["Nederland staat sterker in Europa. Goede diplomatie, eerlijke handelsverdragen en steun voor ontwikkelingssamenwerking."],
     ["Sterker in Europa"], [], []),
    (MU, ["Discriminatie hoort nergens thuis. Gelijkheid en privacy zijn grondrechten, de rechtsstaat beschermt iedereen."],
     [], [], []),
    (MU, ["Onze krijgsmacht verdient modern materieel. Meer soldaten, een sterke marine en respect voor veteranen."],
     ["Sterke defensie"], [], []),
    (MU, ["Kijk vanavond het grote debat en beslis zelf. Middenunie staat klaar."], [], [], []),
    (MU, ["Brussel is geen bedreiging maar een kans. Een sterk verdrag, open buitenland en een gezamenlijke ambassade."],
     [], [], ["middenunie.nl"]),
    (MU, ["Ook wij kiezen voor zorg: behoud de huisarts in het dorp en steun de verpleegkundige."],
     ["Zorg dichtbij"], [], []),
    (MU, ["Betere stations, stipte treinen en veilig spoor in de regio."], [], [], []),
]

# Duplicate-text ads: (source text index, page override). Parties reuse
# copy across pages and campaigns; 41 + 9 = 50 ads, 41 unique texts.
DUPLICATES = [
    (0, PB2), (0, PB), (4, PB2), (13, GF), (15, GF),
    (22, VL), (26, VL), (31, MU), (34, MU),
]

# Ads with no demographic data at all, and ads missing only region cells
# (exercises the per-axis coverage diagnostics).
NO_DEMOGRAPHICS = {7, 29}
NO_REGION = {9, 35}
OPEN_ENDED_IMPRESSIONS = {6, 28}


def rounded_shares(rng: random.Random, weights: list[float]) -> list[float]:
    total = sum(weights)
    shares = [round(w / total, 4) for w in weights]
    shares[shares.index(max(shares))] = round(max(shares) + (1.0 - sum(shares)), 4)
    return shares


def joint_demographics(rng: random.Random) -> list[dict]:
    female = rng.uniform(0.35, 0.65)
    age_weights = [rng.uniform(0.001, 0.02)] + [rng.uniform(0.5, 1.5) for _ in range(6)]
    cells = []
    for gender, gender_share in (("female", female), ("male", 1.0 - female)):
        for age, weight in zip(AGE_KEYS, age_weights):
            cells.append((gender, age, gender_share * weight))
    shares = rounded_shares(rng, [c[2] for c in cells])
    return [
        {"gender": gender, "age": age, "percentage": share}
        for (gender, age, _), share in zip(cells, shares)
        if share > 0
    ]


def region_cells(rng: random.Random) -> list[dict]:
    weights = [base * rng.uniform(0.6, 1.6) for _, base in REGIONS]
    shares = rounded_shares(rng, weights)
    return [
        {"region": name, "percentage": share}
        for (name, _), share in zip(REGIONS, shares)
        if share > 0
    ]


def main() -> None:
    rng = random.Random(20210317)
    specs = [(page, t, d, c, cap) for page, t, d, c, cap in TEXTS]
    specs += [TEXTS[i][:0] + (page,) + TEXTS[i][1:] for i, page in DUPLICATES]

    records = []
    for index, (page, bodies, titles, descriptions, captions) in enumerate(specs):
        page_id, page_name = page
        start_day = rng.randrange(0, 190)
        duration = rng.randrange(2, 40)
        month = 9 + start_day // 30
        year = 2020
        if month > 12:
            month -= 12
            year += 1
        day = 1 + start_day % 28
        start = f"{year}-{month:02d}-{day:02d}"

        record = {
            "id": f"AD{1000 + index}",
            "page_id": page_id,
            "page_name": page_name,
            "currency": "EUR",
            "ad_delivery_start_time": start,
            "spend": dict(zip(("lower_bound", "upper_bound"), rng.choice(SPEND_BUCKETS))),
        }
        if rng.random() > 0.15:
            record["ad_delivery_stop_time"] = _add_days(year, month, day, duration)
        if index in OPEN_ENDED_IMPRESSIONS:
            record["impressions"] = {"lower_bound": 1000000}
        else:
            lower, upper = rng.choice(IMPRESSION_BUCKETS)
            record["impressions"] = {"lower_bound": lower, "upper_bound": upper}
        if rng.random() > 0.5:
            lower, upper = rng.choice(AUDIENCE_BUCKETS)
            audience = {"lower_bound": lower}
            if upper is not None:
                audience["upper_bound"] = upper
            record["estimated_audience_size"] = audience
        if index not in NO_DEMOGRAPHICS:
            record["demographic_distribution"] = joint_demographics(rng)
            if index not in NO_REGION:
                record["delivery_by_region"] = region_cells(rng)
        record["ad_creative_bodies"] = bodies
        if titles:
            record["ad_creative_link_titles"] = titles
        if descriptions:
            record["ad_creative_link_descriptions"] = descriptions
        if captions:
            record["ad_creative_link_captions"] = captions
        records.append(record)

    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} ads to {OUT}")


def _add_days(year: int, month: int, day: int, delta: int) -> str:
    import datetime

    return (datetime.date(year, month, day) + datetime.timedelta(days=delta)).isoformat()


if __name__ == "__main__":
    main()

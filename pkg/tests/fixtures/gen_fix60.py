"""Generate the committed 60-class end-to-end fixture.

Every expected outcome below was assigned by hand from the scenario
design and is cross-checked here with the independent oracle helpers
(high-precision cosine margins, brute-force ancestor closure, strict
majority arithmetic) BEFORE the package is allowed near the fixture.
The script writes deterministic files; rerunning it reproduces them
byte for byte.

Usage: python tests/fixtures/gen_fix60.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))
from oracles import hp_cosine, transitive_closure  # noqa: E402

OUT = Path(__file__).resolve().parent / "fix60"
DIM = 8
EPSILON_TIE = 0.01
TAU_EXACT = 0.95
TAU_SIM = 0.75

# ---------------------------------------------------------------- targets

TARGET_EDGES = [
    ("Agent", "Thing"),
    ("Person", "Agent"),
    ("Athlete", "Person"),
    ("BasketballPlayer", "Athlete"),
    ("Politician", "Person"),
    ("Organization", "Agent"),
    ("Company", "Organization"),
    ("SportsTeam", "Organization"),
    ("AmericanFootballTeam", "SportsTeam"),
    ("Place", "Thing"),
    ("City", "Place"),
    ("Country", "Place"),
    ("ArchitecturalStructure", "Place"),
    ("Building", "ArchitecturalStructure"),
    ("Venue", "Building"),
    ("Theatre", "Venue"),
    ("Museum", "ArchitecturalStructure"),
    ("Event", "Thing"),
    ("SportsEvent", "Event"),
    ("Work", "Thing"),
    ("Album", "Work"),
    ("Film", "Work"),
    ("Game", "Thing"),
    ("CardGame", "Game"),
]

TARGET_COUNTS = {
    "Person": 120000, "Organization": 90000, "Place": 80000, "Work": 50000,
    "Politician": 15000, "Museum": 4000, "BasketballPlayer": 7000,
    "Theatre": 2500, "City": 30000, "Country": 3200,
}

# split_camel_case(label) written out by hand; independent of the package
TARGET_SURFACES = {
    "Thing": "thing", "Agent": "agent", "Person": "person", "Athlete": "athlete",
    "BasketballPlayer": "basketball player", "Politician": "politician",
    "Organization": "organization", "Company": "company", "SportsTeam": "sports team",
    "AmericanFootballTeam": "american football team", "Place": "place", "City": "city",
    "Country": "country", "ArchitecturalStructure": "architectural structure",
    "Building": "building", "Venue": "venue", "Theatre": "theatre", "Museum": "museum",
    "Event": "event", "SportsEvent": "sports event", "Work": "work", "Album": "album",
    "Film": "film", "Game": "game", "CardGame": "card game",
}

TARGETS = ["Thing"] + sorted({c for c, _ in TARGET_EDGES})
assert len(TARGETS) == 25

# extra phrases in the store: (key, anchored target, cosine to it)
PHRASE_SPECS = [
    ("opera house", "Theatre", 0.98),
    ("house", "Building", 0.90),
    ("football stadium", "Venue", 0.96),
    ("stadium", "Venue", 0.90),
    ("motion picture", "Film", 0.97),
    ("automobile manufacturer", "Company", 0.97),
    ("megacity", "City", 0.96),
    ("citadel", "Building", 0.97),
    ("countries", "Country", 0.96),
    ("films", "Film", 0.97),
    ("athletic contest", "SportsEvent", 0.97),
    ("player", "Person", 0.90),
    ("hoops tourney", "SportsEvent", 0.85),
    ("gridiron tourney", "SportsEvent", 0.88),
    ("metropolis", "Place", 0.85),
    ("hall", "Museum", 0.80),
    ("statesman", "Politician", 0.90),
    ("guilds", "Building", 0.85),
    ("team", "SportsTeam", 0.80),
    ("arena", "Venue", 0.90),
]

# ------------------------------------------------------------- sources
# (id, parents, members-spec, expected dbo, expected rule)
# members-spec: (count_typed, ner_label, count_untyped) or None

FINNISH_TEAMS = [
    "Helsinki 69ers", "Helsinki Roosters", "Helsinki Wolverines",
    "Kuopio Steelers", "Seinäjoki Crocodiles", "Tampere Saints", "Turku Trojans",
]

SOURCES = [
    ("Album", [], None, "Album", "EXACT"),
    ("Joan_Baez_compilation_album", ["Album"], None, "Album", "EXACT"),
    ("Card_game", [], None, "CardGame", "EXACT"),
    ("Collectible_card_game", ["Card_game"], None, "CardGame", "EXACT"),
    ("American_football_team_in_Finland", ["Sports_team"], ("finnish", None, 0), "AmericanFootballTeam", "EXACT"),
    ("Basketball_player", [], None, "BasketballPlayer", "EXACT"),
    ("Sports_team", [], None, "SportsTeam", "EXACT"),
    ("Museum", [], None, "Museum", "EXACT"),
    ("Opera_house_in_Puerto_Rico", ["Theatre_in_the_United_States"], None, "Theatre", "EXACT"),
    ("Football_stadium_in_Finland", [], None, "Venue", "EXACT"),
    ("Motion_picture", [], None, "Film", "EXACT"),
    ("Automobile_manufacturer", [], None, "Company", "EXACT"),
    ("Megacity", [], None, "City", "EXACT"),
    ("Theatre_in_the_United_States", [], None, "Theatre", "EXACT"),
    ("Municipal_playhouse_in_Chile", ["Theatre_in_the_United_States"], None, "Theatre", "RULE4"),
    ("Grand_playhouse_in_Peru", ["Theatre_in_the_United_States"], None, "Theatre", "RULE4"),
    ("Opera_salon_in_Argentina", ["Theatre_in_the_United_States"], (3, "FAC", 1), "Theatre", "RULE2"),
    ("Historic_playhouse_in_Quito", ["Grand_playhouse_in_Peru"], None, "Theatre", "RULE4"),
    ("Oulu_gridiron_squad", ["American_football_team_in_Finland"], None, "AmericanFootballTeam", "RULE4"),
    ("Helsinki_gridiron_squad", ["American_football_team_in_Finland"], None, "AmericanFootballTeam", "RULE4"),
    ("Athletics_museum_annex", ["Museum", "Sports_team"], None, None, "MISSING"),
    ("Penn_State_Lady_Lions_basketball_player", ["University_basketball_competitors"], None, "BasketballPlayer", "EXACT"),
    ("University_basketball_competitors", [], (5, "PERSON", 0), "Person", "RULE4"),
    ("Virginia_Tech_Hokies_hoops_player", ["University_basketball_competitors"], None, "BasketballPlayer", "RULE2"),
    ("Lady_Vols_hoops_player", ["University_basketball_competitors"], None, "BasketballPlayer", "RULE2"),
    ("Fighting_Irish_hoops_arena", ["University_basketball_competitors"], None, "Venue", "RULE4"),
    ("American_football_teams_in_Finland", ["Sports_team"], ("finnish", None, 0), "SportsTeam", "RULE2"),
    ("Recipient_of_French_pardons", [], (5, "PERSON", 0), "Person", "RULE4"),
    ("People_from_Atlantis", [], (5, "PERSON", 0), None, "MISSING"),
    ("Villages_in_Lapland", [], (5, "GPE", 1), "Place", "RULE4"),
    ("Shopping_centres_in_Oslo", [], (4, "FAC", 2), "ArchitecturalStructure", "RULE4"),
    ("Hurricanes_in_Iceland", [], (5, "EVENT", 0), "Event", "RULE4"),
    ("Novels_about_dragons", [], (5, "WORK_OF_ART", 0), "Work", "RULE4"),
    ("Discontinued_food_brands", [], (5, "PRODUCT", 0), "Thing", "RULE4"),
    ("Nomadic_peoples_of_Asia", [], (5, "NORP", 0), "Organization", "RULE4"),
    ("Fjords_of_Norway", [], (5, "LOC", 0), "Place", "RULE4"),
    ("Continental_hoops_tourney", [], (5, "EVENT", 0), "SportsEvent", "RULE2"),
    ("Annual_gridiron_tourney", [], (4, "EVENT", 1), "SportsEvent", "RULE2"),
    ("Architectural_structure", [], None, "ArchitecturalStructure", "EXACT"),
    ("Defensive_walls_in_Iberia", ["Architectural_structure"], (5, "FAC", 0), "ArchitecturalStructure", "RULE3"),
    ("Metropolis_of_Persia", [], (5, "GPE", 0), "Place", "RULE3"),
    ("Recorded_media_hall", ["Literary_work", "Museum"], (5, "WORK_OF_ART", 0), "Museum", "RULE3"),
    ("Literary_work", [], None, "Work", "EXACT"),
    ("Veteran_statesman_of_Atlantis", [], (3, "FAC", 0), "Politician", "RULE1_FILTERED+RULE4"),
    ("Merchant_guilds_of_Venice", [], (4, "NORP", 1), "Organization", "RULE1_FILTERED+RULE4"),
    ("Miscellanea_of_Zork", ["Unsorted_curiosities"], None, None, "MISSING"),
    ("Unsorted_curiosities", ["Miscellanea_of_Zork"], None, None, "MISSING"),
    ("Oddments_and_sundries", [], None, None, "MISSING"),
    ("Star_Wars_fan_conventions", [], (5, "EVENT", 0), "Event", "RULE4"),
    ("Citadel_of_Carcassonne", [], None, "Building", "EXACT"),
    ("Fortress_towers_in_Malta", ["Citadel_of_Carcassonne"], (5, "FAC", 0), "Building", "RULE2"),
    ("Singers_from_Mars", [], (5, "PERSON", 1), "Person", "RULE4"),
    ("Railway_terminus_building", [], None, "Building", "EXACT"),
    ("National_capital_city", [], None, "City", "EXACT"),
    ("Island_countries", [], None, "Country", "EXACT"),
    ("Sovereign_country", [], None, "Country", "EXACT"),
    ("Philharmonic_ensembles", [], (5, "ORG", 0), "Organization", "RULE4"),
    ("Documentary_films_about_whales", [], None, "Film", "EXACT"),
    ("Champions_of_chess", [], (5, "PERSON", 0), "Person", "RULE4"),
    ("Athletic_contest", [], None, "SportsEvent", "EXACT"),
]

FIXTURE_LEXNAMES = {
    "statesman": "noun.person",
    "guilds": "noun.group",
    "champions": "noun.person",
    "ensembles": "noun.group",
    "singers": "noun.person",
    "people": "noun.group",
    "teams": "noun.group",
    "recipient": "noun.person",
    "player": "noun.person",
    "villages": "noun.location",
    "countries": "noun.location",
    "novels": "noun.communication",
    "films": "noun.communication",
}

ANNOTATION_ROWS = [
    ("Star Wars fan conventions", "PROPN PROPN NOUN NOUN", "3 3 3 3"),
]


def build_vectors():
    """Target directions plus anchored phrase vectors, margin-checked."""
    for seed in range(100):
        rng = np.random.default_rng(20240 + seed)
        targets = {}
        for name in TARGETS:
            v = rng.normal(size=DIM)
            targets[name] = v / np.linalg.norm(v)
        # target surfaces must not collide: every pair well below 1 - epsilon
        worst = max(
            abs(hp_cosine(targets[a], targets[b]))
            for i, a in enumerate(TARGETS) for b in TARGETS[i + 1:]
        )
        if worst > 0.97:
            continue
        phrases = {}
        ok = True
        for key, anchor, alpha in PHRASE_SPECS:
            base = targets[anchor]
            noise = rng.normal(size=DIM)
            noise -= np.dot(noise, base) * base
            noise /= np.linalg.norm(noise)
            v = alpha * base + np.sqrt(1 - alpha * alpha) * noise
            # the anchored target must win with a clear margin
            others = [abs(hp_cosine(v, targets[t])) for t in TARGETS if t != anchor]
            if max(others) > alpha - 2 * EPSILON_TIE:
                ok = False
                break
            phrases[key] = v
        if ok:
            return targets, phrases
    raise AssertionError("no seed satisfied the margin constraints")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    targets, phrases = build_vectors()
    closure = transitive_closure(TARGETS, TARGET_EDGES)

    # sanity: the chains relied on by RULE2 scenarios really are chains
    assert "ArchitecturalStructure" in closure["Theatre"]
    assert "Building" in closure["Theatre"] and "Venue" in closure["Theatre"]
    assert "ArchitecturalStructure" in closure["Building"]
    assert "Organization" in closure["SportsTeam"]
    assert "Event" in closure["SportsEvent"]
    assert "Person" in closure["BasketballPlayer"]
    # and the RULE3 pairs are incomparable
    assert "Work" not in closure["Museum"] and "Museum" not in closure["Work"]
    # the RULE1 survivors sit under their anchors
    assert "Person" in closure["Politician"]

    ids = [row[0] for row in SOURCES]
    assert len(ids) == 60 and len(set(ids)) == 60
    missing = [row[0] for row in SOURCES if row[3] is None]
    assert len(missing) == 5

    # strict-majority arithmetic for every membership spec
    for cid, _, members, dbo, rule in SOURCES:
        if members is None or members == ("finnish", None, 0):
            continue
        typed, _, untyped = members
        assert 2 * typed > typed + untyped, cid

    # ---- embeddings file
    lines = [f"#dim={DIM}"]
    for name in TARGETS:
        vec = " ".join(repr(x) for x in targets[name].tolist())
        lines.append(f"{TARGET_SURFACES[name]}\t{vec}")
    for key in sorted(phrases):
        vec = " ".join(repr(x) for x in phrases[key].tolist())
        lines.append(f"{key}\t{vec}")
    (OUT / "embeddings.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # ---- target ontology files
    rows = []
    for name in TARGETS:
        count = TARGET_COUNTS.get(name)
        rows.append(f"{name}\t{name}" + (f"\t{count}" if count else ""))
    (OUT / "dbpedia_labels.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    (OUT / "dbpedia_edges.tsv").write_text(
        "\n".join(f"{c}\t{p}" for c, p in TARGET_EDGES) + "\n", encoding="utf-8"
    )

    # ---- source taxonomy files
    label_rows, edge_rows = [], []
    for cid, parents, _, _, _ in SOURCES:
        label_rows.append(f"{cid}\t{cid.replace('_', ' ')}")
        for parent in parents:
            edge_rows.append(f"{cid}\t{parent}")
    (OUT / "cg_labels.tsv").write_text("\n".join(label_rows) + "\n", encoding="utf-8")
    (OUT / "cg_edges.tsv").write_text("\n".join(edge_rows) + "\n", encoding="utf-8")

    # ---- membership + NER provider
    member_rows, ner_rows = [], []
    for title in FINNISH_TEAMS:
        ner_rows.append(f"{title}\tORG")
    for cid, _, members, _, _ in SOURCES:
        if members is None:
            continue
        if members == ("finnish", None, 0):
            for title in FINNISH_TEAMS:
                member_rows.append(f"{cid}\t{title}")
            continue
        typed, label, untyped = members
        for i in range(typed):
            title = f"{cid} member {i}"
            member_rows.append(f"{cid}\t{title}")
            ner_rows.append(f"{title}\t{label}")
        for i in range(untyped):
            member_rows.append(f"{cid}\t{cid} unlisted {i}")
    (OUT / "members.tsv").write_text("\n".join(member_rows) + "\n", encoding="utf-8")
    (OUT / "ner.tsv").write_text("\n".join(ner_rows) + "\n", encoding="utf-8")

    # ---- lexnames, annotations
    (OUT / "lexnames.tsv").write_text(
        "\n".join(f"{k}\t{v}" for k, v in sorted(FIXTURE_LEXNAMES.items())) + "\n",
        encoding="utf-8",
    )
    (OUT / "annotations.tsv").write_text(
        "\n".join("\t".join(row) for row in ANNOTATION_ROWS) + "\n", encoding="utf-8"
    )

    # ---- benchmark and expectations
    bench_rows = [f"{cid}\t{dbo}" for cid, _, _, dbo, _ in SOURCES if dbo is not None]
    assert len(bench_rows) == 55
    (OUT / "benchmark.tsv").write_text("\n".join(sorted(bench_rows)) + "\n", encoding="utf-8")
    expected = {
        "expected": {cid: {"dbo": dbo, "rule": rule} for cid, _, _, dbo, rule in SOURCES},
        "missing": sorted(missing),
    }
    (OUT / "expected.json").write_text(
        json.dumps(expected, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(f"wrote fixture to {OUT}")


if __name__ == "__main__":
    main()

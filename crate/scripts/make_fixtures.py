#!/usr/bin/env python3
"""Regenerate the TSV fixtures under fixtures/.

Deterministic: running it twice produces byte-identical files.

  fixtures/startrek/   small reconstructed corpus (280 stories) whose Klingon
                       TOS/TAS storyset reproduces the reference k/K counts
  fixtures/ontology/   full-shape ontology (1536 themes) and invalid variants
"""
import os

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")
HEADER = "theme\tparent\tdomain\tdefinition\n"
ROOT_THEME = "literary thematic entity"
DOMAINS = ["the human condition", "society", "the pursuit of knowledge", "alternate reality"]


def write(path, text):
    path = os.path.join(ROOT, path)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def theme_rows(rows):
    out = [HEADER]
    for name, parent, domain, definition in rows:
        out.append(f"{name}\t{parent}\t{domain}\t{definition}\n")
    return "".join(out)


# ---------------------------------------------------------------- ontology shape

def shaped_domain(domain, count, leaves, height, prefix):
    """Tree with the given theme count, leaf count and edge height."""
    internal = count - leaves
    rows = [(domain, ROOT_THEME, domain, f"Top theme of the {domain} domain.")]
    n = 0

    def fresh():
        nonlocal n
        n += 1
        return f"{prefix} {n:04d}"

    # spine that realizes the height
    parent = domain
    for _ in range(height - 1):
        name = fresh()
        rows.append((name, parent, domain, f"Spine theme {name}."))
        parent = name
    name = fresh()
    rows.append((name, parent, domain, f"Deepest theme {name}."))
    # remaining internal nodes hang off the domain root, each with one leaf
    for _ in range(internal - height):
        mid = fresh()
        rows.append((mid, domain, domain, f"Intermediate theme {mid}."))
        leaf = fresh()
        rows.append((leaf, mid, domain, f"Leaf theme {leaf}."))
    while len(rows) < count:
        leaf = fresh()
        rows.append((leaf, domain, domain, f"Leaf theme {leaf}."))
    assert len(rows) == count
    return rows


def full_ontology():
    rows = [(ROOT_THEME, "", "root", "")]
    rows += shaped_domain("the human condition", 631, 578, 6, "human condition theme")
    rows += shaped_domain("society", 279, 256, 4, "society theme")
    rows += shaped_domain("the pursuit of knowledge", 235, 217, 4, "knowledge theme")
    rows += shaped_domain("alternate reality", 390, 357, 4, "alternate reality theme")
    return rows


def invalid_ontologies():
    base = [(ROOT_THEME, "", "root", ""), ("society", ROOT_THEME, "society", "Society.")]
    write("ontology/duplicate.tsv", theme_rows(base + [
        ("war", "society", "society", "Armed conflict."),
        ("war", "society", "society", "Armed conflict again."),
    ]))
    write("ontology/cycle.tsv", theme_rows(base + [
        ("A", "B", "society", "Theme A."),
        ("B", "A", "society", "Theme B."),
    ]))
    write("ontology/unknown_parent.tsv", theme_rows(base + [
        ("war", "politics", "society", "Armed conflict."),
    ]))
    write("ontology/multi_root.tsv", theme_rows(base + [
        ("orphan", "", "root", ""),
    ]))


# ---------------------------------------------------------------- star trek corpus

FILLERS = {
    "the human condition": ["ambition", "fear", "friendship", "romantic love"],
    "society": ["crime", "justice", "politics", "social class"],
    "the pursuit of knowledge": ["exploration", "medicine", "science", "technology"],
    "alternate reality": ["robot", "space travel", "teleportation", "time travel"],
}

HC, SO, KN, AR = DOMAINS
NAMED = [
    # theme, parent, domain
    ("culturally distinguished life form", AR, AR),
    ("über-belligerent alien", "culturally distinguished life form", AR),
    ("telepathic alien", "culturally distinguished life form", AR),
    ("miscellaneous life form", AR, AR),
    ("tribble", "miscellaneous life form", AR),
    ("mugato", "miscellaneous life form", AR),
    ("gaseous life form", "miscellaneous life form", AR),
    ("transnational social issue", SO, SO),
    ("diplomacy", "transnational social issue", SO),
    ("diplomatic negotiating", "diplomacy", SO),
    ("interstellar treaty", "diplomacy", SO),
    ("war", "transnational social issue", SO),
    ("atrocities of war", "war", SO),
    ("space battle", "war", SO),
    ("conflict over a shared resource", "transnational social issue", SO),
    ("imperialistic society", SO, SO),
    ("cross cultural understanding", SO, SO),
    ("conflict of moral codes", "cross cultural understanding", SO),
    ("first contact", "cross cultural understanding", SO),
    ("man vs. beast", HC, HC),
    ("pacifism", HC, HC),
    ("humility", HC, HC),
    ("patience", HC, HC),
    ("temperance", HC, HC),
    ("honor", HC, HC),
    ("the art of war", KN, KN),
    ("military tactics", "the art of war", KN),
    ("starship combat strategy", "the art of war", KN),
]

KLINGON = ["TOS12", "TOS26", "TOS44", "TOS49", "TOS66", "TOS72", "TAS05", "TAS11"]


# observed annotations: theme -> (test story numbers 1..8, background index ranges)
LAYOUT = {
    "über-belligerent alien": ([1, 2, 3, 4, 5], []),
    "telepathic alien": ([6], [(0, 14)]),
    "diplomatic negotiating": ([1, 2, 3, 4], [(14, 17)]),
    "interstellar treaty": ([5], [(17, 28)]),
    "atrocities of war": ([1, 2], []),
    "space battle": ([3, 4, 6], [(23, 40)]),
    "conflict over a shared resource": ([5, 6], []),
    "mugato": ([6], [(40, 42)]),
    "gaseous life form": ([], [(42, 45)]),
    "tribble": ([7, 8], []),
    "man vs. beast": ([6, 7, 8], [(45, 47)]),
    "pacifism": ([1, 2, 3], [(47, 51)]),
    "military tactics": ([2, 3, 4], [(51, 55)]),
    "starship combat strategy": ([1, 5], [(55, 69)]),
    "imperialistic society": ([1, 2, 5], [(69, 74)]),
    "conflict of moral codes": ([3, 4], [(74, 75)]),
    "first contact": ([5, 6], [(75, 86)]),
    "humility": ([4, 5, 6], [(86, 92)]),
    "patience": ([5, 6, 7], [(87, 94)]),
    "temperance": ([7, 8], [(92, 94)]),
    "honor": ([8], [(10, 11), (20, 21)]),
}

# filler slot per Klingon story, balanced so each filler lands on two of them
KLINGON_FILLER = [0, 1, 2, 3, 0, 1, 2, 3]


def startrek():
    rows = [(ROOT_THEME, "", "root", "")]
    for d in DOMAINS:
        rows.append((d, ROOT_THEME, d, f"Top theme of the {d} domain."))
    for name, parent, domain in NAMED:
        rows.append((name, parent, domain, f"Stories featuring {name}."))
    for d in DOMAINS:
        for f in FILLERS[d]:
            rows.append((f, d, d, f"Stories featuring {f}."))
    write("startrek/themes.tsv", theme_rows(rows))

    tos = [f"TOS{i:02d}" for i in range(1, 81)]
    tas = [f"TAS{i:02d}" for i in range(1, 23)]
    tng = [f"TNG{i:03d}" for i in range(1, 179)]
    stories = ["id\ttitle\tcollections\n"]
    for sid in tos + tas + tng:
        series = sid[:3]
        tags = [series]
        if sid in KLINGON:
            tags.append("klingon")
        stories.append(f"{sid}\t{series} episode {int(sid[3:])}\t{','.join(tags)}\n")
    write("startrek/stories.tsv", "".join(stories))

    background = [s for s in tos + tas if s not in KLINGON]
    assert len(background) == 94
    ann = {}

    def add(sid, theme, level):
        ann.setdefault(sid, []).append((theme, level))

    for theme, (test, ranges) in LAYOUT.items():
        for t in test:
            add(KLINGON[t - 1], theme, "central")
        for lo, hi in ranges:
            for i in range(lo, hi):
                add(background[i], theme, "central" if i % 2 == 0 else "peripheral")

    for i, sid in enumerate(tos + tas + tng):
        slot = KLINGON_FILLER[KLINGON.index(sid)] if sid in KLINGON else i % 4
        for d_i, d in enumerate(DOMAINS):
            add(sid, FILLERS[d][(slot + d_i) % 4], "peripheral")

    lines = ["story_id\ttheme\tlevel\n"]
    for sid in tos + tas + tng:
        for theme, level in ann.get(sid, []):
            lines.append(f"{sid}\t{theme}\t{level}\n")
    write("startrek/annotations.tsv", "".join(lines))

    sets = {
        "tos": tos,
        "tas": tas,
        "tng": tng,
        "tos-tas": tos + tas,
        "all": tos + tas + tng,
        "klingon-tos-tas": KLINGON,
    }
    out = ["storyset\tstory_id\n"]
    for name, ids in sets.items():
        for sid in ids:
            out.append(f"{name}\t{sid}\n")
    write("startrek/storysets.tsv", "".join(out))


if __name__ == "__main__":
    write("ontology/themes.tsv", theme_rows(full_ontology()))
    invalid_ontologies()
    startrek()

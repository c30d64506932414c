#!/usr/bin/env python3
"""Generates the bundled synthetic sample corpus (deterministic).

Layout: 2 channel groups x 3 channels x 10 videos, one caption and one
comments document per video. The text is synthetic: function words are
woven between content words so the bundled language scorer accepts every
document except one deliberately non-English caption; one further caption
carries no lexicon words so the zero-category exclusion path is exercised.
Bias-test vocabulary is planted with group-dependent contexts and appears
at least twice corpus-wide so embedding vocabularies cover it.
"""

import json
import pathlib
import random

HERE = pathlib.Path(__file__).resolve().parent
DATA = HERE.parent / "data"
OUT = DATA / "sample_corpus.jsonl"
SEED = 20240817

# mirrors the scorer's closed-class list (subset is fine: we only need
# enough coverage, and membership of the woven words is what matters)
FUNCTION_WORDS = {
    "the", "be", "to", "of", "and", "a", "in", "that", "have", "i", "it",
    "for", "not", "on", "with", "he", "as", "you", "do", "at", "this",
    "but", "his", "by", "from", "they", "we", "say", "her", "she", "or",
    "an", "will", "my", "one", "all", "would", "there", "their", "is",
    "was", "are", "were", "been", "being", "has", "had",
}
WEAVE = ["the", "and", "of", "to", "in", "is", "that", "it", "for", "with",
         "on", "as", "this", "but", "they", "we"]

NEUTRAL = ["bird", "mountain", "river", "table", "window", "door", "cloud",
           "stone", "path", "garden", "song", "story", "book", "game",
           "recipe", "flower", "tree", "village", "city", "nation"]

THEMES = {
    ("rightwing", "caption"): [
        ["border", "crisis", "invasion", "security", "patriot", "flag",
         "agenda", "media", "truth", "election"],
        ["church", "faith", "prayer", "tradition", "family", "culture",
         "heritage", "moral", "decay", "west"],
    ],
    ("rightwing", "comments"): [
        ["expose", "wake", "sheep", "globalist", "ban", "deport", "traitor",
         "censor", "lies", "elite"],
        ["share", "spread", "truth", "patriot", "stand", "defend", "flag",
         "boycott", "petition", "rally"],
    ],
    ("baseline", "caption"): [
        ["recipe", "kitchen", "bake", "flavor", "tutorial", "review",
         "camera", "travel", "budget", "packing"],
        ["science", "history", "experiment", "museum", "lecture", "puzzle",
         "music", "guitar", "practice", "melody"],
    ],
    ("baseline", "comments"): [
        ["awesome", "subscribe", "channel", "video", "editing", "quality",
         "helpful", "tutorial", "playlist", "upload"],
        ["tried", "worked", "thanks", "question", "timestamp", "update",
         "favorite", "share", "bookmark", "notes"],
    ],
}


def load_lexicon_words():
    words = set()
    for line in (DATA / "lexicon_synthetic.tsv").read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        _, _, members = line.split("\t")
        words.update(members.split(","))
    return words


def load_lexicon_by_polarity():
    neg, pos = [], []
    for line in (DATA / "lexicon_synthetic.tsv").read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        _, polarity, members = line.split("\t")
        (neg if polarity == "negative" else pos).extend(members.split(","))
    return neg, pos


def load_lemmas():
    table = {}
    for line in (DATA / "lemmas_en.txt").read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        surface, lemma = line.split("\t")
        table[surface] = lemma
    return table


def load_specs():
    return json.loads((DATA / "weat_specs.json").read_text())


def weave(content):
    """Interleaves closed-class words so half of all tokens are function
    words; adds sentence punctuation."""
    out = []
    for i, word in enumerate(content):
        out.append(WEAVE[i % len(WEAVE)])
        out.append(word + ("." if i % 9 == 8 else ""))
    return " ".join(out)


def rotate(pool, state, take):
    picked = []
    for _ in range(take):
        picked.append(pool[state[0] % len(pool)])
        state[0] += 1
    return picked


def main():
    rng = random.Random(SEED)
    lexicon_words = load_lexicon_words()
    negative_words, positive_words = load_lexicon_by_polarity()
    lemmas = load_lemmas()
    specs = load_specs()

    channels = []
    for group, prefix, names in [
        ("rightwing", "rw", ["Right Lens", "Patriot Desk", "Border Watch"]),
        ("baseline", "bl", ["Maker Corner", "Quiet Science", "Travel Pot"]),
    ]:
        for i, name in enumerate(names, start=1):
            channels.append({
                "type": "channel",
                "id": f"{prefix}{i}",
                "name": name,
                "group": group,
                "subscribers": 10000 + 3500 * i + (40000 if group == "rightwing" else 0),
            })

    # rotation states per (spec, side) keep word usage balanced
    state = {}
    for spec in specs:
        for side in ("class1", "class2", "attrs1", "attrs2"):
            state[(spec["name"], side)] = [0]

    def bias_blocks(group):
        """Planted co-occurrence runs: rightwing text pairs class1 words
        with negative attributes and class2 with positive ones; baseline
        text pairs both classes with positive attributes. Each block stays
        contiguous in the final text so the words share context windows."""
        blocks = []
        for spec in specs:
            c1 = rotate(spec["class1"], state[(spec["name"], "class1")], 4)
            c2 = rotate(spec["class2"], state[(spec["name"], "class2")], 4)
            a1 = rotate(spec["attrs1"], state[(spec["name"], "attrs1")], 6)
            a2 = rotate(spec["attrs2"], state[(spec["name"], "attrs2")], 6)
            if group == "rightwing":
                blocks.append([c1[0], a1[0], a1[1], c1[1], a1[2]])
                blocks.append([c2[0], a2[0], a2[1], c2[1], a2[2]])
                blocks.append([a1[3], c1[2], a1[4], c1[3], a1[5]])
                blocks.append([a2[3], c2[2], a2[4], c2[3], a2[5]])
            else:
                # symmetric: both classes meet both attribute kinds equally,
                # so no association difference is planted
                blocks.append([c1[0], a1[0], c1[1], a2[0]])
                blocks.append([c2[0], a1[1], c2[1], a2[1]])
                blocks.append([c1[2], a2[2], c1[3], a1[2]])
                blocks.append([c2[2], a2[3], c2[3], a1[3]])
        return blocks

    def assemble(blocks, fillers):
        """Shuffles at the unit level: planted blocks stay intact, filler
        words travel in small chunks."""
        units = [list(b) for b in blocks]
        for i in range(0, len(fillers), 3):
            units.append(fillers[i:i + 3])
        rng.shuffle(units)
        return [w for unit in units for w in unit]

    def category_words(group, count):
        primary, secondary = (negative_words, positive_words)
        if group == "baseline":
            primary, secondary = secondary, primary
        words = []
        for i in range(count):
            pool = primary if i % 6 != 5 else secondary
            words.append(pool[rng.randrange(len(pool))])
        return words

    documents = []

    def add_doc(video_id, channel_id, source, text):
        documents.append({
            "type": "doc",
            "video_id": video_id,
            "channel_id": channel_id,
            "source": source,
            "text": text,
        })

    for channel in channels:
        group = channel["group"]
        for v in range(1, 11):
            video_id = f"{channel['id']}v{v:02d}"
            theme_cap = THEMES[(group, "caption")][v % 2]
            theme_com = THEMES[(group, "comments")][v % 2]

            if channel["id"] == "rw3" and v == 10:
                # deliberately non-English caption: no function words
                caption = ("zrk qwv xplat grendok vlim brontu skarv nuthol "
                           "prekt vaznur golmeth trisk polnav queth zindor "
                           "karvel mundrok siltheq branok vilmur ostrek")
            elif channel["id"] == "bl3" and v == 10:
                # English caption with no lexicon members: zero-category
                content = [NEUTRAL[(v + i) % len(NEUTRAL)] for i in range(40)]
                caption = weave(content)
            else:
                fillers = []
                fillers += category_words(group, 12)
                fillers += [theme_cap[rng.randrange(len(theme_cap))]
                            for _ in range(20)]
                fillers += [NEUTRAL[rng.randrange(len(NEUTRAL))]
                            for _ in range(6)]
                caption = weave(assemble(bias_blocks(group), fillers))
                if v == 1:
                    caption = "<b>" + channel["name"].lower() + "</b> " + caption
                if v == 2:
                    caption += " see https://example.com/watch for more"

            fillers = []
            fillers += category_words(group, 8)
            fillers += [theme_com[rng.randrange(len(theme_com))]
                        for _ in range(14)]
            fillers += [NEUTRAL[rng.randrange(len(NEUTRAL))]
                        for _ in range(4)]
            comments = weave(assemble(bias_blocks(group), fillers))
            if v == 3:
                comments = "<a href='https://example.com'>link</a> " + comments

            add_doc(video_id, channel["id"], "caption", caption)
            add_doc(video_id, channel["id"], "comments", comments)

    # ---- self checks ----
    def alpha_tokens(text):
        tokens, current = [], []
        for c in text:
            if c.isalpha():
                current.append(c.lower())
            elif current:
                tokens.append("".join(current))
                current = []
        if current:
            tokens.append("".join(current))
        return tokens

    weat_words = set()
    for spec in specs:
        for side in ("class1", "class2", "attrs1", "attrs2"):
            weat_words.update(spec[side])

    counts = {}
    for doc in documents:
        tokens = alpha_tokens(doc["text"])
        coverage = sum(t in FUNCTION_WORDS for t in tokens) / len(tokens)
        if doc["video_id"] == "rw3v10" and doc["source"] == "caption":
            assert coverage < 0.32, "planted non-English doc scores too high"
        else:
            assert coverage >= 0.36, (doc["video_id"], doc["source"], coverage)
        for token in tokens:
            lemma = lemmas.get(token, token)
            counts[lemma] = counts.get(lemma, 0) + 1
        if doc["video_id"] == "bl3v10" and doc["source"] == "caption":
            hits = [lemmas.get(t, t) for t in tokens
                    if lemmas.get(t, t) in lexicon_words]
            assert not hits, f"zero-category doc holds lexicon words: {hits}"

    missing = sorted(w for w in weat_words if counts.get(w, 0) < 2)
    assert not missing, f"under-represented bias words: {missing}"

    with OUT.open("w") as out:
        for record in channels + documents:
            out.write(json.dumps(record) + "\n")
    print(f"wrote {OUT} ({len(channels)} channels, {len(documents)} documents)")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Generate the bundled mini corpus under data/mini/.

Deterministic synthetic data for the end-to-end smoke test. Each topic has a
formal vocabulary (used in article titles and claims) and a colloquial one
(used in tweets and article subtitles), so lexical retrieval over claim+title
misses most colloquial queries while the trained encoder can bridge them via
the subtitle field.
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "mini"

CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aiou"

N_TOPICS = 50
N_FULL_THREADS = 20   # root + reply + fact-check tweet
N_ROOT_THREADS = 15   # root + fact-check tweet, no reply
N_DEV = 10
N_LTR = 12
N_TEST = 30

FILLERS = ["wow", "lol", "omg", "huh", "yikes", "whoa", "hmm", "haha"]


def make_words(count, salt):
    """Distinct letter-only pseudo-words; CVCVC so the stemmer leaves them."""
    rng = random.Random(salt)
    words = set()
    out = []
    while len(out) < count:
        w = "".join(
            rng.choice(CONSONANTS) if i % 2 == 0 else rng.choice(VOWELS)
            for i in range(5)
        )
        if w not in words:
            words.add(w)
            out.append(w)
    return out


def main():
    rng = random.Random(7)
    # three vocabularies per topic: formal (title/claim), slang (subtitle and
    # crowd tweets), shadow slang (crowd tweets and queries only, absent from
    # every article, so queries need the trained encoder to reach the article)
    pool = make_words(9 * N_TOPICS, "vocab")
    formal = [pool[9 * t : 9 * t + 3] for t in range(N_TOPICS)]
    slang = [pool[9 * t + 3 : 9 * t + 6] for t in range(N_TOPICS)]
    shadow = [pool[9 * t + 6 : 9 * t + 9] for t in range(N_TOPICS)]

    articles = []
    urls = []
    for t in range(N_TOPICS):
        f, s = formal[t], slang[t]
        url = f"https://example.org/fact/{f[0]}-{s[0]}"
        urls.append(url)
        articles.append(
            {
                "url": url,
                "title": f"{f[0]} {f[1]} {f[2]} verdict",
                "subtitle": f"{s[0]} {s[1]} {s[2]} claim online",
                "claim": f"{f[0]} {f[1]} {f[2]} ruling",
                "date": "2020-05-01",
                "author": "staff",
            }
        )

    def crowd_text(t):
        parts = slang[t] + shadow[t]
        if rng.random() < 0.5:
            parts = parts + [rng.choice(FILLERS)]
        if rng.random() < 0.3:
            parts = parts + [rng.choice(formal[t])]
        rng.shuffle(parts)
        return " ".join(parts)

    def query_text(t):
        parts = shadow[t][:]
        if rng.random() < 0.7:
            parts.append(rng.choice(FILLERS))
        if rng.random() < 0.3:
            parts.append(rng.choice(slang[t]))
        if rng.random() < 0.2:
            parts.append(rng.choice(formal[t]))
        rng.shuffle(parts)
        return " ".join(parts)

    tweets = []
    thread_topics = list(range(N_FULL_THREADS + N_ROOT_THREADS))
    for i, t in enumerate(thread_topics):
        root_id = f"r{t:03d}"
        tweets.append(
            {"id": root_id, "text": crowd_text(t)}
        )
        if i < N_FULL_THREADS:
            reply_id = f"p{t:03d}"
            tweets.append(
                {
                    "id": reply_id,
                    "text": crowd_text(t),
                    "in_reply_to": root_id,
                    "conversation_root": root_id,
                }
            )
            fc_parent = reply_id
        else:
            fc_parent = root_id
        tweets.append(
            {
                "id": f"f{t:03d}",
                "text": "this one was already fact checked",
                "in_reply_to": fc_parent,
                "conversation_root": root_id,
                "urls": [urls[t]],
            }
        )

    trained = thread_topics
    qrels = {}
    for prefix, n, salt in (("d", N_DEV, 11), ("l", N_LTR, 13), ("t", N_TEST, 17)):
        pick = random.Random(salt).sample(trained, n)
        rows = []
        for j, t in enumerate(pick):
            qid = f"q{prefix}{j:03d}"
            tweets.append({"id": qid, "text": query_text(t)})
            rows.append((qid, urls[t]))
        qrels[prefix] = rows

    rng.shuffle(tweets)

    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "tweets.jsonl", "w") as f:
        for t in tweets:
            f.write(json.dumps(t, sort_keys=True) + "\n")
    with open(OUT / "articles.jsonl", "w") as f:
        for a in articles:
            f.write(json.dumps(a, sort_keys=True) + "\n")
    names = {"d": "dev", "l": "ltr", "t": "test"}
    for prefix, rows in qrels.items():
        with open(OUT / f"qrels_{names[prefix]}.tsv", "w") as f:
            for qid, url in rows:
                f.write(f"{qid}\t0\t{url}\t1\n")

    print(f"{len(tweets)} tweets, {len(articles)} articles")


if __name__ == "__main__":
    main()

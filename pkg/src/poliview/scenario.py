"""The bundled simulated campaign: two parties, ten candidates, three providers.

Ground truth is fixed here so reports can be reconciled against it:

* ``twitter-sim`` streams one tweet every five minutes for all candidates;
  ``fr06`` never tweets (the zero-activity control).
* ``facebook-sim`` needs a token; the crawler is privacy-blocked on ``uk02``.
* ``site-sim`` is crawled per candidate from their home page.

The French list is longer (six candidates against four), so France posts
more in total while each British candidate posts more on average.
"""

from __future__ import annotations

import json
from pathlib import Path

from .docmodel import canonical_json

START = "2014-05-01T00:00:00Z"
SEED = 2014
FB_TOKEN = "sim-facebook-token"
DATASET = "campaign"

ROSTER = [
    {"id": "fr01", "party": "FR-A", "country": "FR"},
    {"id": "fr02", "party": "FR-A", "country": "FR"},
    {"id": "fr03", "party": "FR-A", "country": "FR"},
    {"id": "fr04", "party": "FR-A", "country": "FR"},
    {"id": "fr05", "party": "FR-A", "country": "FR"},
    {"id": "fr06", "party": "FR-A", "country": "FR"},
    {"id": "uk01", "party": "UK-B", "country": "GB"},
    {"id": "uk02", "party": "UK-B", "country": "GB"},
    {"id": "uk03", "party": "UK-B", "country": "GB"},
    {"id": "uk04", "party": "UK-B", "country": "GB"},
]

TWEETS = {"fr01": 9, "fr02": 8, "fr03": 7, "fr04": 6, "fr05": 6, "fr06": 0,
          "uk01": 9, "uk02": 8, "uk03": 8, "uk04": 7}
FACEBOOK = {"fr01": 4, "fr02": 3, "fr03": 3, "fr04": 2, "fr05": 2, "fr06": 0,
            "uk01": 3, "uk02": None, "uk03": 3, "uk04": 2}        # None: privacy block
SITE = {"fr01": 2, "fr02": 2, "fr03": 1, "fr04": 1, "fr05": 1, "fr06": 0,
        "uk01": 2, "uk02": 1, "uk03": 1, "uk04": 1}

PLATFORM_OF = {"twitter-sim": "twitter", "facebook-sim": "facebook", "site-sim": "site"}
TRUTH = {"twitter": TWEETS, "facebook": FACEBOOK, "site": SITE}

TAGS = {
    "FR": ["europeennes2014", "ep2014", "emploi", "europe", "jeunesse"],
    "GB": ["ep2014", "euco", "jobs", "votelabour", "nhs"],
}
SITE_TAGS = {"FR": ["programme", "europe", "agriculture"], "GB": ["manifesto", "jobs", "housing"]}
CITIES = {"FR": ["Paris", "Lyon", "Marseille", ""], "GB": ["London", "Leeds", "", "Bristol"]}
STREAM_PERIOD = 300


def expected_collected() -> int:
    """Collected documents the scenario is scripted to produce."""
    return sum(n or 0 for counts in TRUTH.values() for n in counts.values())


def _country(cand: str) -> str:
    return next(r["country"] for r in ROSTER if r["id"] == cand)


def tweets() -> list[dict]:
    """Stream order interleaves candidates; dates run over the last ten campaign days."""
    queues = {c: list(range(n)) for c, n in TWEETS.items()}
    out: list[dict] = []
    by_key: dict[tuple[str, int], dict] = {}
    while any(queues.values()):
        for cand in sorted(queues):
            if not queues[cand]:
                continue
            k = queues[cand].pop(0)
            n = len(out)
            country = _country(cand)
            tags = TAGS[country]
            day = 15 + (k * 10) // max(TWEETS[cand], 1)
            tweet = {
                "tweet_id": f"t{n + 1:03d}",
                "user": cand,
                "date": f"2014-05-{day:02d}",
                "time": f"{8 + k % 12:02d}:{(n * 7) % 60:02d}:00",
                "location": CITIES[country][n % len(CITIES[country])],
                "content": f"Post {k + 1} by {cand} #{tags[k % len(tags)]} #{tags[(k * 3 + 1) % len(tags)]}",
            }
            if k == 2:
                # candidate retweets their own first tweet
                tweet["retweet_of"] = by_key[(cand, 0)]["tweet_id"]
            elif k == 4:
                tweet["reply_to"] = by_key[(cand, 1)]["tweet_id"]
            by_key[(cand, k)] = tweet
            out.append(tweet)
    # one reply stamped before the tweet it answers: the planted temporal violation
    victim = by_key[("uk01", 4)]
    original = by_key[("uk01", 1)]
    victim["date"], victim["time"] = original["date"], "07:00:00"
    if victim["time"] >= original["time"]:
        original["time"] = "23:00:00"
    return out


def facebook_script() -> dict:
    responses: dict = {}
    for cand, n in FACEBOOK.items():
        if n is None:
            responses[f"feed/{cand}"] = {"fail": "privacy", "message": "crawler blocked"}
            continue
        country = _country(cand)
        docs = [{
            "post_id": f"fb-{cand}-{k + 1}",
            "user": cand,
            "date": f"2014-05-{16 + 2 * k:02d}",
            "time": "12:00:00",
            "content": f"Meeting {k + 1} with {cand} #{TAGS[country][(k + 2) % len(TAGS[country])]}",
        } for k in range(n)]
        responses[f"feed/{cand}"] = {"documents": docs}
    return {"token": FB_TOKEN, "responses": responses}


def site_host(cand: str) -> str:
    return f"http://{cand}.candidates.example"


def site_script() -> dict:
    responses: dict = {}
    for cand, n in SITE.items():
        home = site_host(cand) + "/"
        country = _country(cand)
        tags = SITE_TAGS[country]

        def page(k: int) -> dict:
            return {"page_id": f"site-{cand}-{k + 1}", "user": cand,
                    "date": f"2014-05-{12 + 5 * k:02d}",
                    "content": f"Page {k + 1} of {cand} #{tags[k % len(tags)]} #{tags[(k + 1) % len(tags)]}"}

        if n == 0:
            responses[home] = {"documents": []}
            continue
        links = ["/news#latest", "http://elsewhere.example/"] if n > 1 else ["http://elsewhere.example/"]
        responses[home] = {"documents": [page(0)], "links": links}
        if n > 1:
            responses[site_host(cand) + "/news"] = {"documents": [page(1)], "links": ["/"]}
    return {"responses": responses}


def simulator_script() -> dict:
    return {"providers": {
        "twitter-sim": {"stream": tweets()},
        "facebook-sim": facebook_script(),
        "site-sim": site_script(),
    }}


def plan(simulator: str = "simulator.json") -> dict:
    stream_items = sum(TWEETS.values())
    return {
        "name": "campaign-2014",
        "seed": SEED,
        "clock": "virtual",
        "start": START,
        "dataset": DATASET,
        "candidate_field": "user",
        "candidates": ROSTER,
        "simulator": simulator,
        "providers": [
            {"id": "twitter-sim", "kind": "stream", "endpoint": "sim:twitter", "platform": "twitter",
             "jurisdiction": "US",
             "sla": {"max_requests": 180, "window": 900, "default_privacy": "public",
                     "default_license": "twitter-terms"},
             "network": {"latency": 0.08, "throughput": 2_000_000, "price_per_byte": 0.0},
             "invocation_price": 0.0, "method_throughput": 50},
            {"id": "facebook-sim", "kind": "ondemand", "endpoint": "sim:facebook",
             "platform": "facebook", "jurisdiction": "US",
             "sla": {"max_requests": 5, "window": 3600, "auth_required": True,
                     "default_privacy": "public", "default_license": "facebook-terms"},
             "network": {"latency": 0.12, "throughput": 1_000_000, "price_per_byte": 1e-9},
             "invocation_price": 0.001, "method_throughput": 5},
            {"id": "site-sim", "kind": "site", "endpoint": "sim:sites", "platform": "site",
             "jurisdiction": "EU",
             "sla": {"max_requests": 2, "window": 60, "default_privacy": "public",
                     "default_license": "all-rights-reserved"},
             "network": {"latency": 0.2, "throughput": 500_000, "price_per_byte": 0.0},
             "invocation_price": 0.0, "method_throughput": 20},
        ],
        "tasks": [
            {"type": "subscribe", "provider": "twitter-sim", "start": 0,
             "rate": {"items": 1, "period": STREAM_PERIOD},
             "end": {"duration": STREAM_PERIOD * (stream_items + 2)},
             "flush": {"max_count": 10, "max_elapsed": 3600, "max_bytes": 4096},
             "track": [r["id"] for r in ROSTER]},
            {"type": "pull", "provider": "facebook-sim", "credentials": FB_TOKEN,
             "requests": [{"key": f"feed/{r['id']}", "candidate": r["id"], "at": 1000 * i}
                          for i, r in enumerate(ROSTER)]},
        ] + [
            {"type": "crawl", "provider": "site-sim", "candidate": r["id"], "start": 100 + i,
             "seeds": [site_host(r["id"]) + "/"], "max_depth": 2}
            for i, r in enumerate(ROSTER)
        ],
    }


def view_config() -> dict:
    return {
        "author_path": "user",
        "fd_pairs": [["tweet_id", "user"], ["user", "location"], ["date", "time"],
                     ["post_id", "user"], ["page_id", "user"]],
        "temporal": [
            {"link_path": "reply_to", "time_paths": ["date", "time"], "id_path": "tweet_id"},
            {"link_path": "retweet_of", "time_paths": ["date", "time"], "id_path": "tweet_id"},
        ],
    }


def ruleset() -> list[dict]:
    return [
        {"scope": "*", "purpose": "archive", "action": "allow", "max_privacy": "private"},
        {"scope": "*", "purpose": "analyze", "action": "allow", "max_privacy": "restricted"},
        {"scope": "*", "purpose": "export", "action": "allow", "max_privacy": "public"},
        {"scope": "attribute:body.location", "purpose": "export",
         "action": {"redact": ["body.location"]}, "max_privacy": "public"},
    ]


def annotations() -> list[dict]:
    return [
        {"path": "location", "action": "override_type", "value": "text", "analyst": "analyst-1",
         "at": "2014-06-01T09:00:00Z"},
        {"path": "content", "action": "note", "value": "hashtags drive topic tagging",
         "analyst": "analyst-1", "at": "2014-06-01T09:05:00Z"},
    ]


FILES = {
    "plan.json": lambda: plan(),
    "simulator.json": simulator_script,
    "view-config.json": view_config,
    "ruleset.json": ruleset,
    "annotations.json": annotations,
}


def write_scenario(out_dir: Path | str) -> list[Path]:
    """Write the scenario inputs (plan, simulator script, configs) into ``out_dir``."""
    from .store import atomic_write

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, make in FILES.items():
        path = out_dir / name
        atomic_write(path, json.dumps(json.loads(canonical_json(make())), indent=2,
                                      ensure_ascii=False) + "\n")
        written.append(path)
    return written

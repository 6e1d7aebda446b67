#!/usr/bin/env python3
"""Regenerates fixtures/mini and fixtures/quotes.

Deterministic: the same script always writes the same bytes. The graph
expectations in mini/expected.json are computed here from the raw records,
independently of the Rust implementation.

    python3 fixtures/tools/make_fixtures.py
"""

import json
import math
import random
import re
from collections import Counter
from itertools import combinations
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
SEED = 20240611
DIM = 25

# ---------------------------------------------------------------------------
# Vocabulary

TOPICS = {
    "sleep": ["sleep", "insomnia", "melatonin", "circadian", "napping", "bedtime", "dreams", "rest"],
    "coffee": ["coffee", "caffeine", "espresso", "beans", "brewing", "cups", "roast", "drinkers"],
    "exercise": ["exercise", "running", "fitness", "muscles", "workout", "cardio", "training", "athletes"],
    "climate": ["climate", "warming", "carbon", "emissions", "glaciers", "temperatures", "drought", "atmosphere"],
    "vaccine": ["vaccine", "immunity", "antibodies", "doses", "booster", "virus", "infection", "immunization"],
    "diet": ["diet", "sugar", "calories", "vegetables", "protein", "fasting", "nutrition", "meals"],
    "brain": ["brain", "neurons", "memory", "cognition", "dementia", "cortex", "synapses", "learning"],
    "ocean": ["ocean", "coral", "reefs", "plankton", "fisheries", "salinity", "currents", "marine"],
}
TOPIC_NAMES = list(TOPICS)

# Twenty sub-topics, one per paper; each has words only it uses.
SUBTOPICS = [
    ("sleep", ["teenagers", "smartphones", "screens"]),
    ("sleep", ["shiftwork", "nurses", "nightshifts"]),
    ("sleep", ["apnea", "snoring", "oxygen"]),
    ("coffee", ["liver", "enzymes", "cirrhosis"]),
    ("coffee", ["heartbeat", "arrhythmia", "palpitations"]),
    ("exercise", ["knees", "cartilage", "joints"]),
    ("exercise", ["elderly", "falls", "balance"]),
    ("exercise", ["mood", "anxiety", "endorphins"]),
    ("climate", ["permafrost", "methane", "tundra"]),
    ("climate", ["wildfires", "forests", "smoke"]),
    ("climate", ["monsoon", "rainfall", "floods"]),
    ("vaccine", ["measles", "children", "outbreaks"]),
    ("vaccine", ["influenza", "strains", "seasonal"]),
    ("diet", ["gut", "microbiome", "bacteria"]),
    ("diet", ["salt", "bloodpressure", "hypertension"]),
    ("brain", ["bilingual", "languages", "vocabulary"]),
    ("brain", ["music", "rhythm", "melody"]),
    ("ocean", ["acidification", "shells", "oysters"]),
    ("ocean", ["whales", "migration", "sonar"]),
    ("ocean", ["microplastics", "plastic", "debris"]),
]

REPORTING = ["say", "says", "said", "claim", "claims", "claimed", "find", "found", "finds", "show", "shows",
             "showed", "report", "reported", "suggest", "suggests", "suggested", "argue", "argued", "conclude",
             "concluded", "prove", "proved", "analyze", "analyzed", "explain", "explained", "note", "noted",
             "warn", "warned", "believe", "believes", "estimate", "estimated", "state", "stated"]
STUDY = ["study", "studies", "survey", "analysis", "research", "trial", "trials", "paper", "experiment",
         "findings", "review"]
SCIENTIST = ["researcher", "researchers", "scientist", "scientists", "analyst", "expert", "experts", "author",
             "authors", "epidemiologist", "biologist", "physicist"]
POSITIVE = ["great", "excellent", "interesting", "helpful", "useful", "promising", "impressive", "good",
            "fascinating", "valuable", "informative", "solid", "thorough", "wonderful", "amazing"]
NEGATIVE = ["misleading", "wrong", "nonsense", "bogus", "flawed", "exaggerated", "fake", "hoax", "dubious",
            "unproven", "sloppy", "false", "rubbish", "hype", "questionable"]

GIVEN = ["laura", "david", "maria", "james", "sarah", "michael", "elena", "thomas", "priya", "omar", "grace",
         "lucas", "nina", "peter", "julia", "samuel", "hannah", "daniel", "sophie", "kevin", "rachel", "henry",
         "isabel", "jonathan", "claire", "martin", "olivia", "victoria"]
SURNAMES = ["Chen", "Okafor", "Lindqvist", "Moreau", "Haddad", "Kowalski", "Nakamura", "Ferreira", "Brennan",
            "Abara", "Petrov", "Castillo", "Whitfield", "Osei", "Varga", "Iyer", "Duval", "Larsen", "Mbeki",
            "Tanaka", "Rossi", "Quinn", "Adeyemi", "Novak", "Sorensen", "Kaur", "Delgado", "Holm"]
PLACES = ["Oslo", "Leeds", "Toronto", "Utrecht", "Melbourne", "Geneva", "Bristol", "Madrid", "Boston", "Kyoto"]
MONTHS = ["January", "February", "March", "April", "June", "July", "September", "October", "November"]

SCIENCE_DOMAINS = ["nature.com", "science.org", "cell.com", "thelancet.com", "pnas.org"]
JOURNAL_NAMES = {"nature.com": "Nature", "science.org": "Science", "cell.com": "Cell",
                 "thelancet.com": "The Lancet", "pnas.org": "PNAS"}

OUTLETS = [
    # domain, tier, alexa rank
    ("sciencedesk.org", 5, 1200),
    ("labtimes.com", 5, 3400),
    ("researchwire.net", 5, 8100),
    ("viralhealthnow.com", 1, 52000),
    ("clickwellness.net", 1, 118000),
    ("shockingfacts.info", 1, None),
    ("townherald.com", None, 90500),
]
TIER5 = [d for d, t, _ in OUTLETS if t == 5]
TIER1 = [d for d, t, _ in OUTLETS if t == 1]

FILLER = ["households", "volunteers", "clinics", "schools", "villages", "veterans", "twins", "students",
          "farmers", "retirees", "commuters", "pilots", "teachers", "smokers", "mothers", "infants",
          "questionnaires", "sensors", "wristbands", "registries", "interviews", "scans", "diaries",
          "records", "satellites", "buoys", "archives", "hospitals", "pharmacies", "neighbourhoods",
          "winters", "summers", "weekends", "holidays", "deadlines", "lockdowns", "budgets", "incomes"]

KEYWORDS = ["study", "research", "researchers", "scientists", "paper", "findings"]


def words(text):
    return [w.lower() for w in re.split(r"[^A-Za-z]+", text) if w]


# ---------------------------------------------------------------------------
# Independent graph oracle


def normalize(url):
    m = re.match(r"^([a-z]+)://([^/?#]+)([^?#]*)(\?[^#]*)?", url.strip())
    scheme, host, path, query = m.group(1), m.group(2).lower().rstrip("."), m.group(3), m.group(4) or ""
    return f"{scheme}://{host}{path.rstrip('/')}{query if query != '?' else ''}"


def registrable(url):
    host = re.match(r"^[a-z]+://([^/?#:]+)", url).group(1).lower()
    return ".".join(host.split(".")[-2:])


def keyword_hit(text):
    low = text.lower()
    for k in KEYWORDS:
        for m in re.finditer(re.escape(k), low):
            before = low[m.start() - 1] if m.start() > 0 else " "
            after = low[m.end()] if m.end() < len(low) else " "
            if not before.isalnum() and not after.isalnum():
                return True
    return False


def tf(text):
    return Counter(words(text))


def cosine(a, b):
    dot = sum(v * b.get(k, 0) for k, v in a.items())
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    return dot / (na * nb) if na and nb else 0.0


def graph_oracle(postings, articles, papers, threshold=0.9):
    filtered = [p for p in postings if p["urls"] and keyword_hit(p["text"])]
    art_by_url = {normalize(a["url"]): a["id"] for a in articles}
    pap_by_url = {normalize(p["url"]): p["id"] for p in papers}
    kind = {}
    ok = {}
    for p in filtered:
        kind[p["id"]], ok[p["id"]] = "posting", True
    for a in articles:
        kind[a["id"]], ok[a["id"]] = "article", a["parse_ok"]
    for p in papers:
        kind[p["id"]], ok[p["id"]] = "paper", p["parse_ok"]
    edges = set()
    for p in filtered:
        for u in p["urls"]:
            a = art_by_url.get(normalize(u))
            if a:
                edges.add((p["id"], a))
    for a in articles:
        for u in a["out_links"]:
            n = normalize(u)
            if n in pap_by_url:
                edges.add((a["id"], pap_by_url[n]))
            elif registrable(n) in SCIENCE_DOMAINS:
                d = "domain:" + registrable(n)
                kind[d], ok[d] = "science_domain", True
                edges.add((a["id"], d))
    built = (len(kind), len(edges))

    nodes = {n for n in kind if ok[n]}
    malformed = sorted(n for n in kind if not ok[n])
    live = {e for e in edges if e[0] in nodes and e[1] in nodes}
    unref, orphaned = [], []
    while True:
        succ = {}
        for s, d in live:
            succ.setdefault(s, set()).add(d)
        arts = {n for n in nodes if kind[n] == "article"
                and not any(kind[s] in ("paper", "science_domain") for s in succ.get(n, ()))}
        nodes -= arts
        live = {e for e in live if e[0] in nodes and e[1] in nodes}
        succ = {}
        for s, d in live:
            succ.setdefault(s, set()).add(d)
        posts = {n for n in nodes if kind[n] == "posting" and not succ.get(n)}
        nodes -= posts
        live = {e for e in live if e[0] in nodes and e[1] in nodes}
        if not arts and not posts:
            break
        unref += sorted(arts)
        orphaned += sorted(posts)
    pruned = (len(nodes), len(live))

    present = sorted((a for a in articles if a["id"] in nodes), key=lambda a: a["id"])
    tfs = [tf("\n\n".join(a["paragraphs"])) for a in present]
    pairs = [(i, j) for i, j in combinations(range(len(present)), 2) if cosine(tfs[i], tfs[j]) > threshold]
    merged = {}
    for i, j in pairs:
        a, b = present[i], present[j]
        la, lb = len(set(a["out_links"])), len(set(b["out_links"]))
        survivor, removed = (b, a) if lb > la else (a, b)
        merged[removed["id"]] = survivor["id"]
    after_nodes = nodes - set(merged)
    after_edges = {(s, merged.get(d, d)) for s, d in live if s not in merged}
    near_misses = sorted(
        (round(cosine(tfs[i], tfs[j]), 4), present[i]["id"], present[j]["id"])
        for i, j in combinations(range(len(present)), 2)
        if (i, j) not in pairs
    )[-1]
    return {
        "filtered_postings": len(filtered),
        "built_nodes": built[0],
        "built_edges": built[1],
        "malformed": malformed,
        "unreferenced_articles": sorted(unref),
        "orphaned_postings": sorted(orphaned),
        "pruned_nodes": pruned[0],
        "pruned_edges": pruned[1],
        "merges": merged,
        "merged_nodes": len(after_nodes),
        "merged_edges": len(after_edges),
        "rewired_postings": sorted({s for s, d in live if d in merged}),
        "max_unmerged_cosine": near_misses[0],
    }


# ---------------------------------------------------------------------------
# Mini corpus


class Mini:
    def __init__(self, rng):
        self.rng = rng
        self.papers = []
        self.articles = []
        self.postings = []
        self.replies = []
        self.names = []
        pool = [(g.capitalize(), s) for g, s in zip(GIVEN, SURNAMES)]
        rng.shuffle(pool)
        self.name_pool = pool

    def person(self, i):
        g, s = self.name_pool[i % len(self.name_pool)]
        return f"{g} {s}"

    def make_papers(self):
        r = self.rng
        for i, (topic, vocab_set) in enumerate(SUBTOPICS):
            domain = SCIENCE_DOMAINS[i % len(SCIENCE_DOMAINS)]
            tw = TOPICS[topic]
            sents = []
            for _ in range(7):
                a, b = r.sample(vocab_set, 2)
                c, d = r.sample(tw, 2)
                sents.append(r.choice([
                    f"We measured {a} and {c} in a cohort followed over several years.",
                    f"Associations between {a}, {b} and {c} were estimated with mixed models.",
                    f"The {c} response depended on {b} and on baseline {d}.",
                    f"Our data indicate that {a} modulates {c} through {b}.",
                    f"Sensitivity analyses of {b} confirmed the {d} estimates.",
                ]))
            self.papers.append({
                "id": f"paper{i + 1:02}",
                "url": f"https://www.{domain}/articles/sq-{i + 1:03}",
                "title": f"Effects of {vocab_set[0]} on {tw[0]} and {vocab_set[1]}",
                "body": " ".join(sents),
                "parse_ok": True,
            })
        # Unparseable landing page; linked by one article that also links a real paper.
        self.papers.append({
            "id": "paper21",
            "url": "https://www.cell.com/articles/sq-021",
            "title": "",
            "body": "",
            "parse_ok": False,
        })

    def filler(self, k):
        return self.rng.sample(FILLER, k)

    def background(self, tw, vocab_set):
        r = self.rng
        f = self.filler(6)
        t = r.sample(tw, 3)
        s = r.choice(vocab_set)
        return r.choice([
            f"Earlier work on {t[0]} in {f[0]} and {f[1]} produced mixed results.",
            f"Rates of {t[1]} vary widely between {f[2]} and {f[3]}, the team noted.",
            f"{f[4].capitalize()} data on {s} were collected between 2012 and 2019.",
            f"Questions about {t[2]} have followed {f[5]} for decades.",
            f"The {f[0]} cohort was drawn from {r.randint(3, 40)} {f[1]}.",
            f"Changes in {s} were tracked with {f[2]} and {f[3]}.",
            f"Public interest in {t[0]} has risen alongside {f[4]}.",
            f"Measurements of {t[1]} relied on {f[5]} rather than self-reports.",
            f"Previous estimates of {s} came mostly from {f[0]}.",
            f"Critics have long pointed to {f[1]} as a confounder for {t[2]}.",
        ])

    def rich_article(self, idx, sub, outlet):
        r = self.rng
        topic, vocab_set = SUBTOPICS[sub]
        tw = TOPICS[topic]
        paper = self.papers[sub]
        journal = JOURNAL_NAMES[SCIENCE_DOMAINS[sub % len(SCIENCE_DOMAINS)]]
        lead = self.person(idx)
        other = self.person(idx + 11)
        place = r.choice(PLACES)
        month = r.choice(MONTHS)
        n = r.choice([640, 1200, 2300, 3100, 4800, 910])
        a, b, c = vocab_set
        t1, t2, t3, t4 = r.sample(tw, 4)
        pct = r.choice([12, 18, 23, 31, 8])
        f = self.filler(4)
        paras = [
            r.choice([
                f"A study published in {journal} on {r.randint(2, 27)} {month} 2021 followed {n:,} adults "
                f"and linked {a} to changes in {t1}.",
                f"Writing in {journal} on {r.randint(2, 27)} {month} 2021, a team tracked {n:,} {f[0]} "
                f"and tied {a} to {t1}.",
                f"{n:,} {f[0]} took part in the research, which appeared in {journal} in {month} 2021.",
            ]),
            r.choice([
                f"Participants with more {a} showed {pct}% higher {t2} scores after {r.randint(2, 6)} years.",
                f"Those reporting more {a} had {pct}% more {t2} over the follow-up period.",
                f"{t2.capitalize()} rose by {pct}% among people with high {a}.",
            ]),
            r.choice([
                f"\"We did not expect {b} to matter this much for {t1},\" said {lead}, a researcher at the "
                f"University of {place} who led the work.",
                f"\"The role of {b} surprised us,\" said {lead} of the University of {place}.",
                f"\"{b.capitalize()} turned out to be central to {t1},\" {lead} said.",
            ]),
            r.choice([
                f"{lead} said that the effect of {c} on {t3} held after adjusting for age and income.",
                f"{lead} argued that {c} deserves more attention from clinicians.",
                f"According to {lead}, the link between {c} and {t3} was consistent across {f[1]}.",
            ]),
            r.choice([
                f"The analysis found that {b} explained about a third of the difference in {t2}.",
                f"The study shows that {b} accounts for much of the variation in {t2}.",
                f"The survey suggests that {b} and {t2} are closely connected.",
            ]),
            r.choice([
                f"{other}, a scientist at the Institute of {r.choice(PLACES)} who was not involved, "
                f"argued that the {t4} measurements were careful but the sample lacked diversity.",
                f"{other}, an epidemiologist at {place} College, said that the {t4} findings need replication.",
                f"Independent experts such as {other} noted that {f[2]} were underrepresented.",
            ]),
            r.choice([
                f"\"The next step is a randomized trial of {a},\" {other} said.",
                f"\"I would like to see {a} tested in {f[3]},\" said {other}.",
            ]),
            f"Funding came from the {place} Health Foundation; the authors declared no conflicts.",
        ]
        paras[4:4] = [self.background(tw, vocab_set) for _ in range(3)]
        links = [paper["url"]]
        if idx % 3 == 0:
            links.append(f"https://www.{SCIENCE_DOMAINS[(sub + 2) % len(SCIENCE_DOMAINS)]}")
        return {
            "id": f"art{idx + 1:02}",
            "url": f"https://www.{outlet}/health/{a}-{t1}-{idx + 1}",
            "outlet": "",
            "title": f"{a.capitalize()} linked to {t1} in {n:,}-person study",
            "byline": lead if idx % 4 != 1 else other,
            "paragraphs": paras,
            "out_links": links,
            "parse_ok": True,
        }

    def poor_article(self, idx, sub, outlet):
        r = self.rng
        topic, vocab_set = SUBTOPICS[sub]
        tw = TOPICS[topic]
        paper = self.papers[sub]
        a, b, _ = vocab_set
        t1, t2 = r.sample(tw, 2)
        f = self.filler(3)
        title = r.choice([
            f"You Won't Believe What {a.capitalize()} Does To Your {t1.capitalize()}",
            f"This One Weird Trick About {a.capitalize()} Will Change Your {t1.capitalize()} Forever",
            f"{r.randint(7, 19)} Shocking Facts About {t1.capitalize()} Doctors Hate",
            f"What Happens To Your {t1.capitalize()} When You Try {a.capitalize()} Will Shock You",
        ])
        paras = [
            r.choice([
                f"Experts say {a} is amazing for your {t1}!",
                f"Experts believe {a} is the answer for {t1} and {f[0]}!",
                f"Some experts claim {a} fixes {t1} overnight.",
            ]),
            r.choice([
                f"Researchers believe {b} could totally change {t2} forever.",
                f"Scientists say {b} and {f[1]} are the new secret to {t2}.",
                f"It is said that {b} beats everything for {t2}.",
            ]),
            r.choice([
                f"Some scientists claim it is the best thing ever for {t1}.",
                f"Many believe {f[2]} will never be the same.",
                f"Nobody talks about {a}, but everybody should!",
            ]),
            r.choice(["Share this with everyone you love!", "Try it today and thank us later!",
                      "Click through for the full list!"]),
        ]
        return {
            "id": f"art{idx + 1:02}",
            "url": f"https://www.{outlet}/wow/{a}-{idx + 1}",
            "outlet": "",
            "title": title,
            "paragraphs": paras,
            "out_links": [paper["url"]],
            "parse_ok": True,
        }

    def make_articles(self):
        # 0..27 alternate tier 5 / tier 1; 28, 29 come from an unrated outlet.
        for i in range(30):
            sub = i % 20
            if i < 28:
                outlet = (TIER5 if i % 2 == 0 else TIER1)[(i // 2) % 3]
                art = self.rich_article(i, sub, outlet) if i % 2 == 0 else self.poor_article(i, sub, outlet)
            else:
                outlet = "townherald.com" if i == 28 else "citygazette.com"
                art = self.rich_article(i, sub, outlet)
            self.articles.append(art)
        self.articles[5]["out_links"].append(self.papers[20]["url"])

        # Reference-free articles: links go nowhere scientific.
        for k, outlet in enumerate(["viralhealthnow.com", "townherald.com", "labtimes.com"]):
            r = self.rng
            tw = TOPICS[TOPIC_NAMES[k]]
            self.articles.append({
                "id": f"art{31 + k}",
                "url": f"https://www.{outlet}/opinion/column-{k + 1}",
                "outlet": "",
                "title": f"Column: my week with {tw[0]}",
                "paragraphs": [
                    f"I spent a week thinking about {tw[1]} and {tw[2]}.",
                    f"My neighbour swears by {tw[3]} and {r.choice(tw)}.",
                ],
                "out_links": [f"https://www.example-blog.com/{tw[0]}", "https://www.youtube.com/watch?v=abc"],
                "parse_ok": True,
            })
        # Page the scraper could not parse.
        self.articles.append({
            "id": "art34",
            "url": "https://www.labtimes.com/broken/page",
            "outlet": "",
            "title": "",
            "paragraphs": [],
            "out_links": [self.papers[0]["url"]],
            "parse_ok": False,
        })
        # Syndicated copy of art03 with one edited sentence and an extra link,
        # so the copy carries more out-links and survives the merge.
        orig = self.articles[2]
        dup = json.loads(json.dumps(orig))
        dup["id"] = "art35"
        dup["url"] = "https://www.researchwire.net/syndicated/" + orig["url"].rsplit("/", 1)[1]
        dup["paragraphs"][-1] = "Funding came from public grants; the authors declared no conflicts."
        dup["out_links"] = orig["out_links"] + [f"https://www.{SCIENCE_DOMAINS[4]}"]
        self.articles.append(dup)

    def posting(self, pid, urls, text, hours, rich):
        r = self.rng
        followers = r.randint(800, 40000) if rich else r.randint(20, 900)
        return {
            "id": pid,
            "author_id": f"u{r.randint(1, 60):03}",
            "text": text,
            "urls": urls,
            "likes": r.randint(5, 80) if rich else r.randint(0, 6),
            "retweets": r.randint(2, 30) if rich else r.randint(0, 3),
            "followers": followers,
            "followees": r.randint(50, 1500),
            "country": r.choice(["US", "GB", "DE", "IN", "BR", "CA", "AU", "NG"]) if rich else r.choice(["US", "GB"]),
            "timestamp": 1_614_556_800 + int(hours * 3600),
            "reply_ids": [],
        }

    def make_postings(self):
        r = self.rng
        n = 0

        def pid():
            nonlocal n
            n += 1
            return f"p{n:03}"

        for i, art in enumerate(self.articles[:30]):
            rich = i % 2 == 0
            count = 4 if rich else 2
            for k in range(count):
                hours = r.uniform(0, 200 if rich else 30)
                text = r.choice([
                    f"New study: {art['title']}",
                    f"Interesting research on this {art['title'].lower()}",
                    f"Scientists report {art['title'].lower()}",
                    f"{art['title']} (paper linked inside)",
                ])
                self.postings.append(self.posting(pid(), [art["url"]], text, hours, rich))
        for art in self.articles[30:33]:
            for k in range(2):
                self.postings.append(self.posting(pid(), [art["url"]], f"Research? {art['title']}",
                                                  r.uniform(0, 20), False))
        # Shares a reference-free article and a good one; survives pruning.
        self.postings.append(self.posting(pid(), [self.articles[30]["url"], self.articles[7]["url"]],
                                          "Two takes on the same research", 3.0, False))
        self.postings.append(self.posting(pid(), [self.articles[33]["url"]], "Study link is broken?", 5.0, False))
        # Postings of the duplicate, and one citing both copies.
        for k in range(2):
            self.postings.append(self.posting(pid(), [self.articles[34]["url"]],
                                              "Scientists report this again", 10.0 + k, True))
        self.postings.append(self.posting(pid(), [self.articles[2]["url"], self.articles[34]["url"] + "/"],
                                          "Same study, two outlets", 12.0, True))
        # Filtered out: no keyword, no url; and one whose url matches nothing.
        self.postings.append(self.posting(pid(), [self.articles[0]["url"]], "Look at this", 1.0, False))
        self.postings.append(self.posting(pid(), [], "A study without a link", 1.0, False))
        self.postings.append(self.posting(pid(), ["https://www.unknownsite.com/x"], "Research elsewhere", 1.0, False))

    REPLY_TEMPLATES = {
        "supporting": [
            "{p} work, thanks for sharing!",
            "Really {p} and {p2} study.",
            "{P} research, this is {p2}!",
            "Such a {p} read, very {p2}.",
            "This is {p} news for {t}!",
        ],
        "commenting": [
            "I read this on the train this morning.",
            "My doctor mentioned {t} last week.",
            "Saving this to read later.",
            "The full paper is here {u}",
            "We discussed {t} in class today.",
            "Tagging my colleague who works on {t}.",
        ],
        "contradicting": [
            "This is {n} and not what the paper says.",
            "{N} claims, the study does not show that.",
            "Total {n}, nobody should believe this.",
            "No, this is {n} and {n2}.",
            "Not true at all, {n} reporting about {t}.",
        ],
        "questioning": [
            "Is the sample big enough?",
            "Does this apply to {t} in children?",
            "Who funded this? Any conflicts?",
            "How did they measure {t}?",
            "Was this a randomized trial?",
            "Where is the link to the paper?",
        ],
    }

    def reply_text(self, label, topic_word):
        r = self.rng
        p, p2 = r.sample(POSITIVE, 2)
        n1, n2 = r.sample(NEGATIVE, 2)
        t = r.choice(self.REPLY_TEMPLATES[label])
        return t.format(p=p, p2=p2, P=p.capitalize(), n=n1, n2=n2, N=n1.capitalize(), t=topic_word,
                        u="https://doi.org/10.1000/xyz")

    def make_replies(self):
        r = self.rng
        by_id = {a["url"]: a for a in self.articles}
        parents = [p for p in self.postings if p["urls"] and p["urls"][0] in by_id and by_id[p["urls"][0]]["parse_ok"]]
        labels = []
        classes = list(self.REPLY_TEMPLATES)
        plan = [c for c in classes for _ in range(60)] + ["not-related"] * 24
        r.shuffle(plan)
        for k, label in enumerate(plan):
            parent = parents[k % len(parents)]
            art = by_id[parent["urls"][0]]
            topic_word = words(art["title"])[-1] if art["title"] else "science"
            if label == "not-related":
                text = r.choice(["Happy birthday mate!", "Anyone watching the match tonight",
                                 "Follow me for daily memes", "Lunch was lovely today"])
                true = label
            else:
                # About one in ten replies reads like another class.
                shown = label if r.random() >= 0.1 else r.choice([c for c in classes if c != label])
                text = self.reply_text(shown, topic_word)
                true = label
            rid = f"r{k + 1:03}"
            self.replies.append({
                "id": rid,
                "parent_id": parent["id"],
                "text": text,
                "likes": r.randint(0, 12),
                "retweets": r.randint(0, 4),
            })
            parent["reply_ids"].append(rid)
            labels.append((rid, true))
        return labels


def fnv1a(s):
    h = 0xCBF29CE484222325
    for b in s.encode():
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def embeddings(rng, vocab):
    def vec(scale=1.0):
        return [rng.gauss(0, scale) for _ in range(DIM)]

    def near(center, spread):
        return [c + rng.gauss(0, spread) for c in center]

    table = {}
    groups = [REPORTING, STUDY, SCIENTIST, POSITIVE, NEGATIVE]
    for g in groups:
        center = vec()
        for w in g:
            table[w] = near(center, 0.15)
    topic_centers = {t: vec() for t in TOPICS}
    for t, ws in TOPICS.items():
        for w in ws:
            table.setdefault(w, near(topic_centers[t], 0.35))
    for topic, vocab_set in SUBTOPICS:
        sub_center = near(topic_centers[topic], 0.6)
        for w in vocab_set:
            table.setdefault(w, near(sub_center, 0.25))
    for w in sorted(vocab):
        table.setdefault(w, vec(0.5))
    lines = [w + " " + " ".join(f"{x:.4f}" for x in table[w]) for w in sorted(table)]
    return "\n".join(lines) + "\n"


def jsonl(records):
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def make_mini():
    rng = random.Random(SEED)
    m = Mini(rng)
    m.make_papers()
    m.make_articles()
    m.make_postings()
    stance = m.make_replies()

    out = ROOT / "mini"
    corpus = out / "corpus"
    write(corpus / "papers.jsonl", jsonl(m.papers))
    write(corpus / "articles.jsonl", jsonl(m.articles))
    write(corpus / "postings.jsonl", jsonl(m.postings))
    write(corpus / "replies.jsonl", jsonl(m.replies))
    write(corpus / "domains.txt", "# science domains\n" + "\n".join(SCIENCE_DOMAINS) + "\n")
    write(corpus / "keywords.txt", "\n".join(KEYWORDS) + "\n")

    vocab = set()
    for a in m.articles:
        vocab.update(words(a["title"] + " " + " ".join(a["paragraphs"])))
    for p in m.papers:
        vocab.update(words(p["title"] + " " + p["body"]))
    for x in m.postings + m.replies:
        vocab.update(words(x["text"]))
    write(out / "embeddings.txt", embeddings(rng, vocab))

    lines = ["domain\ttier\talexa_rank"]
    for d, t, rank in OUTLETS:
        lines.append(f"{d}\t{t if t else '-'}\t{rank if rank else '-'}")
    write(out / "outlets.tsv", "\n".join(lines) + "\n")
    write(out / "stance_labels.tsv", "reply_id\tlabel\n" + "".join(f"{i}\t{l}\n" for i, l in stance))

    # Expert panel for the articles that survive into the graph.
    experts = {}
    for i, a in enumerate(m.articles[:30]):
        if i % 3 == 2:
            continue
        rich = i % 2 == 0 and i < 28
        base = [(4, 5), (5, 5), (4, 4), (3, 5)] if rich else [(1, 2), (2, 2), (1, 1), (1, 3)]
        experts[a["id"]] = base[i % 4]
    write(out / "experts.tsv", "article_id\texpert_a\texpert_b\n"
          + "".join(f"{k}\t{a}\t{b}\n" for k, (a, b) in experts.items()))

    ratings = []
    ids = list(experts)
    for r_i in range(1, 9):
        rater = f"rater{r_i:02}"
        cond = "with_indicators" if fnv1a(rater) % 2 == 0 else "without_indicators"
        noise = 0.6 if cond == "with_indicators" else 1.2
        for k, aid in enumerate(rng.sample(ids, 12)):
            a, b = experts[aid]
            score = min(5, max(1, round((a + b) / 2 + rng.gauss(0, noise))))
            ratings.append({"article_id": aid, "rater_id": rater, "condition": cond, "score": score,
                            "timestamp": 1_620_000_000 + r_i * 1000 + k})
    ratings.append(dict(ratings[0], score=1, timestamp=ratings[0]["timestamp"] + 5))
    write(out / "ratings.jsonl", jsonl(ratings))

    write(out / "sciq.toml", """output_dir = "out"
seed = 42

[corpus]
dir = "corpus"

[inputs]
embeddings = "embeddings.txt"
outlets = "outlets.tsv"
stance_labels = "stance_labels.tsv"
ratings = "ratings.jsonl"
expert_labels = "experts.tsv"

[thresholds]
merge = 0.9
damping = 0.85

[models]
topics = 8
lda_iterations = 200
n_trees = 60
lexicon_neighbors = 4
cv_folds = 5
""")

    expected = graph_oracle(m.postings, m.articles, m.papers)
    expected["tier5_articles"] = sorted(a["id"] for i, a in enumerate(m.articles[:28]) if i % 2 == 0)
    expected["tier1_articles"] = sorted(a["id"] for i, a in enumerate(m.articles[:28]) if i % 2 == 1)
    expected["stance_labeled"] = sum(1 for _, l in stance if l != "not-related")
    assert expected["merges"] == {"art03": "art35"}, expected["merges"]
    assert expected["max_unmerged_cosine"] < 0.85, expected["max_unmerged_cosine"]
    write(out / "expected.json", json.dumps(expected, indent=2, sort_keys=True) + "\n")
    return expected


# ---------------------------------------------------------------------------
# Quote fixture: one sentence per paragraph, annotated quote paragraphs.


def make_quotes():
    rng = random.Random(SEED + 1)
    clauses = [
        "the effect was larger in older adults",
        "the results need to be replicated",
        "the benefit faded after two years",
        "the risk was lower than expected",
        "the drug worked only at high doses",
        "the pattern held in every region",
        "the data were noisier than hoped",
        "the mechanism is still unclear",
        "the signal appeared within weeks",
        "the gap closed once income was considered",
    ]
    pool = [(g.capitalize(), s) for g, s in zip(GIVEN, SURNAMES)]
    records, annotations = [], []
    for i in range(20):
        topic = TOPIC_NAMES[i % len(TOPIC_NAMES)]
        tw = TOPICS[topic]
        g1, s1 = pool[i % len(pool)]
        g2, s2 = pool[(i + 7) % len(pool)]
        c = rng.sample(clauses, 5)
        place = rng.choice(PLACES)
        quotes = [
            f"\"{c[0].capitalize()},\" said {g1} {s1}.",
            f"{g1} {s1} said that {c[1]}.",
            f"The study found that {c[2]}.",
            rng.choice([
                f"Researchers at the University of {place} argue that {c[3]}.",
                f"Scientists suggest that {c[3]}.",
                f"{g2} {s2} concluded that {c[3]}.",
            ]),
            rng.choice([
                f"According to {g2} {s2}, {c[4]}.",
                f"In {g2} {s2}'s view, {c[4]}.",
                f"The analysis showed that {c[4]}.",
                f"\"{c[4].capitalize()},\" {g2} {s2} told reporters.",
            ]),
        ]
        if i % 4 == 3:
            quotes[0] = f"{g1} {s1} reported that {c[0]}."
        distractors = [
            f"The trial enrolled {rng.randint(120, 900)} volunteers in {rng.randint(2015, 2021)}.",
            f"Interest in {tw[0]} and {tw[1]} has grown over the past decade.",
            f"The report was released on a {rng.choice(['Monday', 'Tuesday', 'Thursday'])} morning.",
            f"Sales figures for {tw[2]} products rose sharply last year.",
        ]
        paras = distractors[:2] + quotes[:3] + distractors[2:] + quotes[3:]
        order = list(range(len(paras)))
        rng.shuffle(order)
        paras = [paras[k] for k in order]
        quote_idx = sorted(order.index(k) for k in (2, 3, 4, 7, 8))
        records.append({
            "id": f"q{i + 1:02}",
            "url": f"https://www.sciencedesk.org/q/{i + 1}",
            "outlet": "",
            "title": f"New findings on {tw[0]}",
            "paragraphs": paras,
            "out_links": [],
            "parse_ok": True,
        })
        annotations.append((f"q{i + 1:02}", quote_idx))
    out = ROOT / "quotes"
    write(out / "articles.jsonl", jsonl(records))
    write(out / "annotations.tsv", "article_id\tquote_paragraphs\n"
          + "".join(f"{a}\t{','.join(map(str, q))}\n" for a, q in annotations))


if __name__ == "__main__":
    exp = make_mini()
    make_quotes()
    print(json.dumps({k: v for k, v in exp.items() if not isinstance(v, list)}, indent=1))

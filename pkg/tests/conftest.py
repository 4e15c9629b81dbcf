import json

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=50, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fixture_forum_lines():
    from ohc_topics.synth import fixture_forum

    lines, gold = fixture_forum(n_authors=12, posts_per_author=8, seed=3)
    return lines, gold


@pytest.fixture(scope="session")
def fixture_corpus(fixture_forum_lines):
    from ohc_topics.corpus import ingest_posts

    lines, _ = fixture_forum_lines
    return ingest_posts(lines)


@pytest.fixture()
def post_lines():
    def make(records):
        return [json.dumps(r) for r in records]

    return make

from sesh.querymodels import METHODS
from sesh.reference import EDITIONS, PUBLISHED_IDEAL, PUBLISHED_RESULTS


def test_published_tables_cover_every_method_and_edition():
    assert set(PUBLISHED_RESULTS) == set(METHODS) | {"oracle"}
    for editions in PUBLISHED_RESULTS.values():
        assert tuple(editions) == EDITIONS


def test_published_orderings():
    for edition in EDITIONS:
        tf, ideal, gt = PUBLISHED_IDEAL[edition]
        assert tf <= ideal <= gt
        oracle = PUBLISHED_RESULTS["oracle"][edition][0]
        assert all(PUBLISHED_RESULTS[m][edition][0] <= oracle for m in METHODS)

"""The HTTP next-token-distribution wire protocol, exercised against a live
in-process server."""

import pytest

from pdfa_forge import (
    Alphabet,
    PdfaLanguageModel,
    RemoteModel,
    RemoteModelError,
    lm_equivalent,
    parse_equivalence,
    realize,
)
from pdfa_forge.learner import learn
from pdfa_forge.models import TIMEOUT_ENV_VAR
from pdfa_forge.teacher import BoundedExhaustiveOracle

AB = Alphabet(("a", "b"))


def constant_server(lm_server, probs, status=200):
    lm_server.set_behavior(lambda path, body: (status, {"probs": probs}))


class TestWireProtocol:
    def test_round_trip(self, lm_server):
        constant_server(lm_server, {"a": 0.2, "b": 0.3, "$": 0.5})
        model = RemoteModel(lm_server.endpoint, AB)
        dist = model.query(("a", "b"))
        assert dist.as_dict() == pytest.approx({"a": 0.2, "b": 0.3, "$": 0.5})
        path, body = lm_server.requests[-1]
        assert path == "/next_token_distribution"
        assert body == {"tokens": ["a", "b"]}

    def test_empty_word_is_an_empty_token_list(self, lm_server):
        constant_server(lm_server, {"a": 0.2, "b": 0.3, "$": 0.5})
        RemoteModel(lm_server.endpoint, AB).query(())
        assert lm_server.requests[-1][1] == {"tokens": []}

    def test_sum_violation_is_rejected_by_default(self, lm_server):
        constant_server(lm_server, {"a": 0.2, "b": 0.2, "$": 0.5})
        with pytest.raises(RemoteModelError, match="sum"):
            RemoteModel(lm_server.endpoint, AB).query(())

    def test_renormalize_flag_relaxes_the_sum_check(self, lm_server):
        constant_server(lm_server, {"a": 0.2, "b": 0.2, "$": 0.5})
        model = RemoteModel(lm_server.endpoint, AB, renormalize=True)
        dist = model.query(())
        assert sum(dist.probs) == pytest.approx(1.0)
        assert dist.prob("$") == pytest.approx(0.5 / 0.9)

    def test_tiny_noise_is_absorbed_without_the_flag(self, lm_server):
        constant_server(lm_server, {"a": 0.2, "b": 0.3, "$": 0.5 + 4e-7})
        dist = RemoteModel(lm_server.endpoint, AB).query(())
        assert sum(dist.probs) == pytest.approx(1.0, abs=1e-12)

    def test_symbol_mismatch_is_rejected(self, lm_server):
        constant_server(lm_server, {"a": 0.5, "$": 0.5})
        with pytest.raises(RemoteModelError, match="symbols"):
            RemoteModel(lm_server.endpoint, AB).query(())

    def test_negative_probability_is_rejected(self, lm_server):
        constant_server(lm_server, {"a": -0.1, "b": 0.6, "$": 0.5})
        with pytest.raises(RemoteModelError, match="negative"):
            RemoteModel(lm_server.endpoint, AB).query(())

    def test_malformed_body_is_rejected(self, lm_server):
        lm_server.set_behavior(lambda path, body: (200, {"nope": 1}))
        with pytest.raises(RemoteModelError, match="malformed"):
            RemoteModel(lm_server.endpoint, AB).query(())

    def test_non_200_is_an_error(self, lm_server):
        constant_server(lm_server, {"a": 0.2, "b": 0.3, "$": 0.5}, status=404)
        with pytest.raises(RemoteModelError, match="404"):
            RemoteModel(lm_server.endpoint, AB).query(())


class TestRetries:
    def test_transient_5xx_is_retried(self, lm_server):
        state = {"failures": 2}

        def flaky(path, body):
            if state["failures"] > 0:
                state["failures"] -= 1
                return 503, {}
            return 200, {"probs": {"a": 0.2, "b": 0.3, "$": 0.5}}

        lm_server.set_behavior(flaky)
        model = RemoteModel(lm_server.endpoint, AB, retry_backoff=0.0)
        assert model.query(()).prob("$") == pytest.approx(0.5)
        assert len(lm_server.requests) == 3

    def test_persistent_failure_gives_up_after_attempts(self, lm_server):
        lm_server.set_behavior(lambda path, body: (500, {}))
        model = RemoteModel(lm_server.endpoint, AB, retry_backoff=0.0)
        with pytest.raises(RemoteModelError, match="3 attempts"):
            model.query(())
        assert len(lm_server.requests) == 3

    def test_connection_error_is_retried_then_raised(self):
        model = RemoteModel("http://127.0.0.1:9", AB, retry_backoff=0.0, timeout=0.2)
        with pytest.raises(RemoteModelError, match="attempts"):
            model.query(())


class TestClientConfiguration:
    def test_timeout_env_override(self, lm_server, monkeypatch):
        monkeypatch.setenv(TIMEOUT_ENV_VAR, "2500")
        model = RemoteModel(lm_server.endpoint, AB, timeout=9.0)
        assert model.timeout == pytest.approx(2.5)

    def test_query_length_limit(self, lm_server):
        constant_server(lm_server, {"a": 0.2, "b": 0.3, "$": 0.5})
        model = RemoteModel(lm_server.endpoint, AB, max_query_length=2)
        model.query(("a", "b"))
        with pytest.raises(RemoteModelError, match="length"):
            model.query(("a", "b", "a"))


class TestEndToEndOverHttp:
    def test_learning_a_served_pdfa(self, lm_server, fig3a):
        lm_server.serve_pdfa(fig3a)
        remote = RemoteModel(lm_server.endpoint, fig3a.alphabet, retry_backoff=0.0)
        spec = parse_equivalence("quant:7")
        report = learn(
            remote, spec, BoundedExhaustiveOracle(remote, spec, 8), max_rounds=8
        )
        assert report.converged
        assert report.hypothesis.n_states == 3
        assert lm_equivalent(realize(report.hypothesis), fig3a, spec) is None

    def test_served_model_matches_local_model(self, lm_server, fig2a):
        lm_server.serve_pdfa(fig2a)
        remote = RemoteModel(lm_server.endpoint, fig2a.alphabet)
        local = PdfaLanguageModel(fig2a)
        for n in range(6):
            word = ("a",) * n
            assert remote.query(word).as_dict() == pytest.approx(
                local.query(word).as_dict()
            )

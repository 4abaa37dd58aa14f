import itertools
import random

import pytest

from dtlstar.preorder import Preorder
from dtlstar.semantics import DynModel, enumerate_models, random_model
from dtlstar.states import (
    State,
    StateError,
    TypedPreorder,
    distinctly_typed,
    is_phi_type,
    is_weak_type,
    norm,
    phi_types,
    state_from_json,
    state_of_model_point,
    state_p,
    state_plus,
    state_subst,
    state_to_json,
    sub_dia_count,
    substates,
    t_contains,
    type_of_world,
    typed_preorder_of_model,
    validate_typing,
)
from dtlstar.syntax import Neg, Var, parse, subformulas, sub_pm, variables

p, q = Var("p"), Var("q")


def chain_state(t_a, t_b):
    space = Preorder(["a", "b"], [("b", "a")])
    return State(TypedPreorder(space, {"a": t_a, "b": t_b}), "a")


class TestWeakTypes:
    def test_negation_clash(self):
        assert not is_weak_type([p, Neg(p)])
        assert not is_weak_type([p, Neg(Neg(Neg(p)))])

    def test_conjunction_split(self):
        assert not is_weak_type([parse("p & q"), p])
        assert is_weak_type([parse("p & q"), p, q])

    def test_negated_conjunction_split(self):
        assert not is_weak_type([parse("~(p & q)"), p, q])
        assert is_weak_type([parse("~(p & q)"), Neg(p)])

    def test_hence_body(self):
        assert not is_weak_type([parse("G p")])
        assert is_weak_type([parse("G p"), p])

    def test_phi_type_decides_subformulas(self):
        assert is_phi_type([parse("<>p"), p], [parse("<>p")])
        assert not is_phi_type([parse("<>p")], [parse("<>p")])

    def test_phi_types_for_variable(self):
        out = phi_types([p])
        assert sorted(sorted(map(str, t)) for t in out) == [["p"], ["~p"]]

    def test_phi_types_filter_weak_laws(self):
        out = phi_types([parse("p & q")])
        for t in out:
            if t_contains(t, parse("p & q")):
                assert t_contains(t, p) and t_contains(t, q)


class TestValidateTyping:
    def test_self_witness(self):
        space = Preorder(["w"], [])
        assert validate_typing(TypedPreorder(space, {"w": [p, parse("<>p")]}))

    def test_missing_witness(self):
        space = Preorder(["w"], [])
        v = validate_typing(TypedPreorder(space, {"w": [Neg(p), parse("<>p")]}))
        assert not v

    def test_chain_witness_and_failure(self):
        space = Preorder(["a", "b"], [("b", "a")])
        good = TypedPreorder(space, {"a": [parse("<>{p,q}")], "b": [p, q]})
        assert validate_typing(good)
        bad = TypedPreorder(space, {"a": [parse("<>{p,q}")], "b": [p, Neg(q)]})
        v = validate_typing(bad)
        assert not v and v.witness[0] == "a"

    def test_negated_tangle_refutation(self):
        space = Preorder(["w"], [])
        assert validate_typing(TypedPreorder(space, {"w": [parse("~<>{p}"), Neg(p)]}))
        assert not validate_typing(TypedPreorder(space, {"w": [parse("~<>{p}"), p]}))


class TestTypeOfWorld:
    def test_chain_example(self):
        space = Preorder(["a", "b"], [("b", "a")])
        m = DynModel(space, {"a": "a", "b": "b"}, {"p": ["b"]})
        phi = [parse("<>p")]
        assert type_of_world(m, phi, "a") == {parse("<>p"), Neg(p)}
        assert type_of_world(m, phi, "b") == {parse("<>p"), p}

    def test_empty_phi(self):
        space = Preorder(["a"], [])
        m = DynModel(space, {"a": "a"}, {})
        assert type_of_world(m, [], "a") == frozenset()

    def test_bridge_always_validates(self):
        # induced typed preorders satisfy the tangle witness laws, exhaustively
        pool = [parse("<>p"), parse("<>{p, q}"), parse("~<>p & q")]
        for model in enumerate_models(3, ["p", "q"]):
            for f in pool:
                tp = typed_preorder_of_model(model, [f])
                assert validate_typing(tp)
        # and on every four-world model over one variable
        for model in enumerate_models(4, ["p"]):
            tp = typed_preorder_of_model(model, [parse("<>p & <>~p")])
            assert validate_typing(tp)

    def test_types_are_weak_and_phi_types(self):
        rng = random.Random(1)
        phi = [parse("<>{p, X q} & G p")]
        for _ in range(40):
            m = random_model(rng, 4, ["p", "q"])
            for w in m.space.worlds:
                t = type_of_world(m, phi, w)
                assert is_weak_type(t)
                assert is_phi_type(t, phi)


class TestState:
    def test_rootedness_enforced(self):
        space = Preorder(["a", "b"], [])
        with pytest.raises(StateError):
            State(TypedPreorder(space, {"a": [p], "b": [q]}), "a")

    def test_cluster_dedup_enforced(self):
        space = Preorder(["x", "y"], [("x", "y"), ("y", "x")])
        with pytest.raises(StateError):
            State(TypedPreorder(space, {"x": [p], "y": [p]}), "x")

    def test_isomorphic_states_equal(self):
        s1 = chain_state([p], [q])
        space = Preorder(["u", "v"], [("v", "u")])
        s2 = State(TypedPreorder(space, {"u": [p], "v": [q]}), "u")
        assert s1 == s2
        assert hash(s1) == hash(s2)

    def test_root_type_distinguishes(self):
        space = Preorder(["x", "y"], [("x", "y"), ("y", "x")])
        s1 = State(TypedPreorder(space, {"x": [p], "y": [q]}), "x")
        s2 = State(TypedPreorder(space, {"x": [p], "y": [q]}), "y")
        assert s1 != s2

    def test_json_round_trip(self):
        s = chain_state([p, parse("<>p")], [q])
        again = state_from_json(state_to_json(s))
        assert again == s and state_to_json(again) == state_to_json(s)


class TestNorm:
    def test_single_world(self):
        space = Preorder(["w"], [])
        assert norm(State(TypedPreorder(space, {"w": [p]}), "w")) == (1, 0, 1)

    def test_chain(self):
        assert norm(chain_state([p], [q])) == (2, 1, 2)

    def test_two_leaves(self):
        space = Preorder(["a", "b", "c"], [("b", "a"), ("c", "a")])
        st = State(TypedPreorder(space, {"a": [p], "b": [q], "c": [p, q]}), "a")
        assert norm(st) == (2, 2, 2)

    def test_cluster_counts_toward_height(self):
        # height folds cluster size in, so norm bounds alone bound state size
        space = Preorder(["x", "y"], [("x", "y"), ("y", "x")])
        st = State(TypedPreorder(space, {"x": [p], "y": [q]}), "x")
        assert norm(st) == (2, 0, 2)

    def test_sub_dia_count(self):
        st = chain_state([parse("<>{p, q}"), parse("<>p")], [p])
        assert sub_dia_count(st) == 2


class TestSubstates:
    def test_single(self):
        space = Preorder(["w"], [])
        st = State(TypedPreorder(space, {"w": [p]}), "w")
        assert substates(st) == [st]

    def test_chain(self):
        st = chain_state([p], [q])
        subs = substates(st)
        assert len(subs) == 2
        assert {s.root for s in subs} == {"a", "b"}
        assert {len(s) for s in subs} == {1, 2}

    def test_cluster_keeps_whole_cluster(self):
        space = Preorder(["x", "y"], [("x", "y"), ("y", "x")])
        st = State(TypedPreorder(space, {"x": [p], "y": [q]}), "x")
        assert all(len(s) == 2 for s in substates(st))


class TestStateP:
    def test_single_type(self):
        space = Preorder(["w"], [])
        st = State(TypedPreorder(space, {"w": [p]}), "w")
        ps, mapping = state_p(st)
        assert len(mapping) == 1
        (name, t), = mapping.items()
        assert t == frozenset([p])
        assert ps.root_type() == frozenset([Var(name)])

    def test_two_types(self):
        st = chain_state([p], [q])
        ps, mapping = state_p(st)
        names = sorted(mapping)
        for w in ps.space.worlds:
            t = ps.type_of(w)
            positive = [f for f in t if isinstance(f, Var)]
            negative = [f for f in t if isinstance(f, Neg)]
            assert len(positive) == 1 and len(negative) == len(names) - 1

    def test_shape_preserved(self):
        st = chain_state([p], [q])
        ps, _ = state_p(st)
        assert len(ps) == len(st) and ps.root == st.root


class TestStatePlus:
    def space(self):
        return Preorder(["w"], [])

    def test_no_temporal_members_unchanged(self):
        st = State(TypedPreorder(self.space(), {"w": [p]}), "w")
        assert state_plus(st, [p]).root_type() == frozenset([p])

    def test_hence_from_signature(self):
        st = State(TypedPreorder(self.space(), {"w": [parse("G p"), p]}), "w")
        out = state_plus(st, [parse("G p")])
        assert t_contains(out.root_type(), parse("X G p"))

    def test_unrealized_eventuality_defers(self):
        st = State(TypedPreorder(self.space(), {"w": [parse("~G~p"), Neg(p)]}), "w")
        out = state_plus(st, [q])
        assert t_contains(out.root_type(), parse("X ~G~p"))

    def test_realized_eventuality_not_deferred(self):
        st = State(TypedPreorder(self.space(), {"w": [parse("~G~p"), p]}), "w")
        out = state_plus(st, [q])
        assert not t_contains(out.root_type(), parse("X ~G~p"))

    def test_type_range_variant(self):
        st = State(TypedPreorder(self.space(), {"w": [parse("G p"), p]}), "w")
        out = state_plus(st, [q], range_over_types=True)
        assert t_contains(out.root_type(), parse("X G p"))


class TestStateSubst:
    def test_identity(self):
        st = chain_state([p], [q])
        assert state_subst(st, {}) == st

    def test_inverse_of_hence_elimination(self):
        from dtlstar.syntax import q_transform

        f = parse("G p")
        out, inv = q_transform(f)  # out is a fresh variable for G p
        st = chain_state([out], [p])
        back = state_subst(st, inv)
        assert back.root_type() == frozenset([f])
        assert back.type_of("b") == frozenset([p])

    def test_collision_raises(self):
        space = Preorder(["x", "y"], [("x", "y"), ("y", "x")])
        st = State(TypedPreorder(space, {"x": [p], "y": [q]}), "x")
        with pytest.raises(StateError):
            state_subst(st, {"q": p})


class TestStateOfModelPoint:
    def test_merges_duplicates(self):
        space = Preorder(["x", "y"], [("x", "y"), ("y", "x")])
        m = DynModel(space, {"x": "x", "y": "y"}, {"p": ["x", "y"]})
        st = state_of_model_point(m, [p], "x")
        assert len(st) == 1 and st.root == "x"

    def test_distinct_types_survive(self):
        space = Preorder(["x", "y"], [("x", "y"), ("y", "x")])
        m = DynModel(space, {"x": "x", "y": "y"}, {"p": ["x"]})
        st = state_of_model_point(m, [p], "x")
        assert len(st) == 2

    def test_phi_typed_and_distinct(self):
        rng = random.Random(7)
        phi = [parse("<>p & X q")]
        for _ in range(30):
            m = random_model(rng, 4, ["p", "q"])
            x = rng.choice(m.space.worlds)
            st = state_of_model_point(m, phi, x)
            assert distinctly_typed(st)
            assert validate_typing(st.base)
            for t in st.types:
                assert is_phi_type(t, phi)

import json

import pytest

from distress_nonce.errors import StoreCorrupt
from distress_nonce.protocol import store
from distress_nonce.rng import Prg

from guarantees import NEWS, SHOP, deployment, forward_of


@pytest.fixture
def dep(toy):
    return deployment(toy, "store")


def test_save_load_save_is_byte_identical(dep, tmp_path):
    dep.distress("alice", SHOP)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    store.save_dcp(dep.dcp, a)
    store.load_dcp(dep.dcp, a)
    store.save_dcp(dep.dcp, b)
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert [u["usr"] for u in data["users"]] == sorted(
        ["alice", "bob"], key=lambda n: dep.users[n].creds.id)


@pytest.mark.parametrize("cut", [0, 1, 40, -2])
def test_truncated_store_leaves_dcp_untouched(dep, tmp_path, cut):
    path = tmp_path / "dcp.json"
    store.save_dcp(dep.dcp, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:cut] if cut >= 0 else raw[:len(raw) + cut - 200])
    before = store.dumps(store.databases_to_dict(dep.dcp))
    with pytest.raises(StoreCorrupt):
        store.load_dcp(dep.dcp, path)
    assert store.dumps(store.databases_to_dict(dep.dcp)) == before


def test_bad_rows_are_corrupt(dep, tmp_path):
    path = tmp_path / "dcp.json"
    data = store.databases_to_dict(dep.dcp)
    data["users"].append(dict(data["users"][0]))
    path.write_text(store.dumps(data))
    with pytest.raises(StoreCorrupt):
        store.load_dcp(dep.dcp, path)
    data = store.databases_to_dict(dep.dcp)
    data["version"] = 99
    path.write_text(store.dumps(data))
    with pytest.raises(StoreCorrupt):
        store.load_dcp(dep.dcp, path)


def _script(dep):
    """Nonces with gaps and replays; returns the DCP verdict for each."""
    alice = dep.users["alice"]
    wires = [alice.make_distress_nonce(SHOP) for _ in range(14)]
    order = [0, 0, 3, 2, 9, 13, 12, 13]
    return [dep.dcp.on_forward(forward_of(dep, wires[i])).reason or "accept" for i in order]


def test_window_behaviour_survives_reload(prod, tmp_path):
    memory = deployment(prod, "store", n_max=4)
    memory.distress("alice", SHOP)
    expected = _script(memory)

    reloaded = deployment(prod, "store", n_max=4)
    reloaded.distress("alice", SHOP)
    path = tmp_path / "dcp.json"
    store.save_dcp(reloaded.dcp, path)
    reloaded.dcp.users.clear()
    store.load_dcp(reloaded.dcp, path)
    assert _script(reloaded) == expected
    assert expected[:3] == ["accept", "BadTag", "accept"]
    assert [e.sqn for e in reloaded.dcp.events] == [e.sqn for e in memory.dcp.events]


def test_principals_round_trip(dep):
    srv = dep.servers[NEWS]
    back = store.webserver_from_dict(dep.profile, store.webserver_to_dict(srv), Prg(1))
    assert store.webserver_to_dict(back) == store.webserver_to_dict(srv)
    alice = dep.users["alice"]
    clone = store.user_from_dict(dep.profile, store.user_to_dict(alice), Prg(2))
    assert store.user_to_dict(clone) == store.user_to_dict(alice)
    # the clone continues the same sqn sequence
    assert clone.make_distress_nonce(SHOP, k=5) == alice.make_distress_nonce(SHOP, k=5)
    with pytest.raises(StoreCorrupt):
        store.user_from_dict(dep.profile, {"usr": "x"}, Prg(3))

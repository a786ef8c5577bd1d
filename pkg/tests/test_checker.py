"""Checker oracles against hand-built snapshots and event sequences."""

from ssurb import checker
from ssurb.config import ScenarioConfig
from ssurb.trace import make_header


def header(n=3, b=4, fifo=False, w=5):
    cfg = ScenarioConfig(n=n, buffer_unit_size=b, fifo_enabled=fifo, quiescence_window_cycles=w)
    return make_header(cfg)


def fresh_node(i, n):
    return {
        "id": i,
        "crashed": False,
        "seq": 0,
        "buffer": [],
        "rx_obs": [0] * n,
        "tx_obs": [0] * n,
        "next": [1] * n,
        "pending": 0,
        "reset_phase": "normal",
        "trusted": list(range(1, n + 1)),
        "hb": [0] * n,
        "suspected": [],
    }


def rec(payload, sender, seq, n, delivered=False, rec_by=None):
    return {
        "payload": payload,
        "sender": sender,
        "seq": seq,
        "delivered": delivered,
        "rec_by": rec_by or [sender],
        "prev_hb": [-1] * n,
    }


def snapshot(nodes, channels=None, step=0, cycle=0):
    return {
        "type": "SNAPSHOT",
        "step": step,
        "cycle": cycle,
        "nodes": nodes,
        "channels": channels or [],
        "digest": "x",
    }


# -- consistency ---------------------------------------------------------------


def test_fresh_system_is_consistent():
    h = header()
    snap = snapshot([fresh_node(i, 3) for i in (1, 2, 3)])
    for i in (1, 2, 3):
        ok, clause = checker.consistency_check(snap, i, h, None)
        assert ok, clause
    assert checker.snapshot_all_consistent(snap, h, None)


def test_duplicate_identity_fails_consistency():
    h = header()
    node1 = fresh_node(1, 3)
    node1["seq"] = 2
    node1["tx_obs"] = [0, 0, 0]
    node1["buffer"] = [rec("a", 2, 5, 3), rec("b", 2, 5, 3)]
    snap = snapshot([node1, fresh_node(2, 3), fresh_node(3, 3)])
    ok, clause = checker.consistency_check(snap, 1, h, None)
    assert not ok and clause == "duplicate-identity"


def test_peer_record_above_seq_fails_dominance():
    h = header()
    node1 = fresh_node(1, 3)
    node1["seq"] = 2
    node1["buffer"] = [rec("a", 1, 1, 3), rec("b", 1, 2, 3)]
    node2 = fresh_node(2, 3)
    node2["buffer"] = [rec("m", 1, 9, 3)]
    node2["rx_obs"] = [5, 0, 0]
    snap = snapshot([node1, node2, fresh_node(3, 3)])
    ok, clause = checker.consistency_check(snap, 1, h, None)
    assert not ok and clause == "seq-dominance-buffer"


def test_null_payload_fails_consistency():
    h = header()
    node1 = fresh_node(1, 3)
    node1["buffer"] = [rec(None, 2, 1, 3)]
    snap = snapshot([node1, fresh_node(2, 3), fresh_node(3, 3)])
    ok, clause = checker.consistency_check(snap, 1, h, None)
    assert not ok and clause == "null-payload"


def test_obsolete_record_fails_consistency():
    h = header()
    node1 = fresh_node(1, 3)
    node1["buffer"] = [rec("m", 2, 1, 3, delivered=True, rec_by=[1, 2, 3])]
    snap = snapshot([node1, fresh_node(2, 3), fresh_node(3, 3)])
    ok, clause = checker.consistency_check(snap, 1, h, None)
    assert not ok and clause == "obsolete-record"


def test_stale_packet_blocks_all_consistent_after_corruption():
    h = header()
    nodes = [fresh_node(i, 3) for i in (1, 2, 3)]
    channels = [
        {
            "src": 2,
            "dst": 1,
            "packets": [
                {"kind": "GOSSIP", "max_seq": 0, "rx_obs": 0, "tx_obs": 0, "birth_step": 4}
            ],
        }
    ]
    snap = snapshot(nodes, channels)
    assert checker.snapshot_all_consistent(snap, h, None)
    assert not checker.snapshot_all_consistent(snap, h, 9)  # corruption-era packet
    assert checker.snapshot_all_consistent(snap, h, 2)  # packet born after it


# -- Def-3/Def-4 predicates -------------------------------------------------------


def test_diffuse_predicate_literal():
    node1 = fresh_node(1, 3)
    node1["buffer"] = [rec("m", 2, 1, 3, delivered=False)]
    snap = snapshot([node1, fresh_node(2, 3), fresh_node(3, 3)])
    assert checker.diffuse_predicate(snap, 1, "m")
    node1["buffer"][0]["delivered"] = True
    assert not checker.diffuse_predicate(snap, 1, "m")
    assert not checker.diffuse_predicate(snap, 2, "m")


def test_completely_delivered():
    nodes = [fresh_node(i, 3) for i in (1, 2, 3)]
    nodes[0]["buffer"] = [rec("m", 1, 1, 3, delivered=True, rec_by=[1, 2, 3])]
    snap = snapshot(nodes)
    assert checker.completely_delivered(snap, (1, 1))

    in_flight = snapshot(
        nodes,
        [{"src": 1, "dst": 2, "packets": [
            {"kind": "MSG", "payload": "m", "sender": 1, "seq": 1, "birth_step": 0}]}],
    )
    assert not checker.completely_delivered(in_flight, (1, 1))

    nodes[0]["buffer"][0]["rec_by"] = [1, 2]
    assert not checker.completely_delivered(snapshot(nodes), (1, 1))


def test_completely_delivered_ignores_channels_into_crashed():
    nodes = [fresh_node(i, 3) for i in (1, 2, 3)]
    nodes[2]["crashed"] = True
    stuck = [{"src": 1, "dst": 3, "packets": [
        {"kind": "MSG", "payload": "m", "sender": 1, "seq": 1, "birth_step": 0}]}]
    assert checker.completely_delivered(snapshot(nodes, stuck), (1, 1))


# -- event-level checks -------------------------------------------------------------


def base_events(n=3):
    return [snapshot([fresh_node(i, n) for i in range(1, n + 1)])]


def ev(etype, **kw):
    record = {"type": etype, "step": kw.pop("step", 0)}
    record.update(kw)
    return record


def test_validity_pass_and_fail():
    h = header()
    events = base_events() + [
        ev("BROADCAST", node=1, mid=[1, 1], payload_hash="h"),
        ev("DELIVER", node=2, mid=[1, 1]),
        ev("END", reason="complete-delivery"),
    ]
    ti = checker.index_trace(h, events)
    report = checker.validity_check(ti)
    assert report.verdict == "PASS" and report.measured == {"exemptions": 0}

    bad = base_events() + [
        ev("DELIVER", node=2, mid=[9, 9]),
        ev("END", reason="complete-delivery"),
    ]
    report = checker.validity_check(checker.index_trace(h, bad))
    assert report.verdict == "FAIL"
    assert report.witness["mid"] == [9, 9]


def test_validity_exempts_recovery_window():
    h = header()
    # corruption, a delivery before the post-corruption marker, then stabilization
    events = base_events() + [
        ev("CORRUPT", node=1, kind="RANDOMIZE-ALL", step=1),
        ev("DELIVER", node=1, mid=[7, 7], step=2),
        snapshot([fresh_node(i, 3) for i in (1, 2, 3)], step=3, cycle=1),
        ev("END", reason="stabilized", step=4),
    ]
    report = checker.validity_check(checker.index_trace(h, events))
    assert report.verdict == "PASS"
    assert report.measured["exemptions"] == 1


def test_integrity_duplicate_delivery_fails():
    h = header()
    events = base_events() + [
        ev("BROADCAST", node=1, mid=[1, 1], payload_hash="h"),
        ev("DELIVER", node=2, mid=[1, 1]),
        ev("DELIVER", node=2, mid=[1, 1]),
        ev("END", reason="complete-delivery"),
    ]
    report = checker.integrity_check(checker.index_trace(h, events))
    assert report.verdict == "FAIL"
    assert report.witness["node"] == 2


def test_integrity_empty_trace_passes():
    h = header()
    report = checker.integrity_check(checker.index_trace(h, base_events()))
    assert report.verdict == "PASS"


def test_termination_missing_delivery():
    h = header()
    events = base_events() + [
        ev("BROADCAST", node=1, mid=[1, 1], payload_hash="h"),
        ev("DELIVER", node=1, mid=[1, 1]),
        ev("DELIVER", node=2, mid=[1, 1]),
        # node 3 never delivers
        ev("END", reason="complete-delivery"),
    ]
    report = checker.termination_check(checker.index_trace(h, events))
    assert report.verdict == "FAIL"
    assert report.witness["node"] == 3

    events[-1] = ev("END", reason="max-steps")
    report = checker.termination_check(checker.index_trace(h, events))
    assert report.verdict == "INCONCLUSIVE"


def test_termination_uniformity_from_delivered_antecedent():
    h = header()
    # nobody broadcast (corrupted-origin record), but node 1 delivered it
    events = base_events() + [
        ev("DELIVER", node=1, mid=[2, 5]),
        ev("END", reason="complete-delivery"),
    ]
    report = checker.termination_check(checker.index_trace(h, events))
    assert report.verdict == "FAIL"


def test_fifo_order():
    h = header(fifo=True)
    events = base_events() + [
        ev("DELIVER", node=2, mid=[1, 1]),
        ev("DELIVER", node=2, mid=[3, 2]),  # other senders interleave freely
        ev("DELIVER", node=2, mid=[1, 2]),
        ev("DELIVER", node=2, mid=[1, 3]),
        ev("END", reason="complete-delivery"),
    ]
    assert checker.fifo_check(checker.index_trace(h, events)).verdict == "PASS"

    bad = base_events() + [
        ev("DELIVER", node=2, mid=[1, 2]),
        ev("DELIVER", node=2, mid=[1, 1]),
        ev("END", reason="complete-delivery"),
    ]
    report = checker.fifo_check(checker.index_trace(h, bad))
    assert report.verdict == "FAIL"


def test_fifo_skipped_when_disabled():
    h = header(fifo=False)
    report = checker.fifo_check(checker.index_trace(h, base_events()))
    assert report.verdict == "INCONCLUSIVE"


def test_quiescence_inconclusive_without_window():
    h = header()
    events = base_events() + [ev("END", reason="max-steps")]
    report = checker.quiescence_check(checker.index_trace(h, events))
    assert report.verdict == "INCONCLUSIVE"


def test_quiescence_counts_window_traffic():
    h = header(w=2)
    events = base_events() + [
        ev("BROADCAST", node=1, mid=[1, 1], payload_hash="h"),
        ev("CYCLE", k=1),
        ev("CYCLE", k=2),
        ev("CYCLE", k=3),
        ev("SEND", src=1, dst=2, kind="GOSSIP"),
        ev("SEND", src=1, dst=2, kind="MSG", mid=[1, 1]),
        ev("END", reason="complete-delivery"),
    ]
    report = checker.quiescence_check(checker.index_trace(h, events))
    assert report.verdict == "FAIL"
    assert report.measured["msg_events_in_window"] == 1
    assert report.measured["gossip_events_in_window"] == 1


def test_stabilization_zero_without_corruption():
    h = header()
    events = base_events() + [ev("END", reason="complete-delivery")]
    report = checker.stabilization_time(checker.index_trace(h, events))
    assert report.verdict == "PASS" and report.measured == {"cycles": 0}


def test_stabilization_counts_cycles_to_consistency():
    h = header()
    broken = [fresh_node(i, 3) for i in (1, 2, 3)]
    broken[0] = dict(broken[0], buffer=[rec(None, 2, 1, 3)])
    events = base_events() + [
        ev("CORRUPT", node=1, kind="NULL-PAYLOAD", step=1),
        ev("CYCLE", k=1, step=2),
        snapshot(broken, step=2, cycle=1),
        ev("CYCLE", k=2, step=3),
        snapshot([fresh_node(i, 3) for i in (1, 2, 3)], step=3, cycle=2),
        ev("END", reason="stabilized", step=4),
    ]
    report = checker.stabilization_time(checker.index_trace(h, events))
    assert report.verdict == "PASS"
    assert report.measured["cycles"] == 2


def test_stabilization_fail_reports_clause():
    h = header()
    broken = [fresh_node(i, 3) for i in (1, 2, 3)]
    broken[0] = dict(broken[0], buffer=[rec(None, 2, 1, 3)])
    events = base_events() + [
        ev("CORRUPT", node=1, kind="NULL-PAYLOAD", step=1),
        snapshot(broken, step=2, cycle=1),
        ev("END", reason="max-steps", step=3),
    ]
    report = checker.stabilization_time(checker.index_trace(h, events))
    assert report.verdict == "FAIL"
    assert report.witness["clause"] == "null-payload"


def test_gate_exit_semantics():
    ok = [checker.CheckReport("a", "PASS"), checker.CheckReport("b", "INCONCLUSIVE")]
    assert checker.gate(ok) == 0
    assert checker.gate(ok + [checker.CheckReport("c", "FAIL")]) == 1

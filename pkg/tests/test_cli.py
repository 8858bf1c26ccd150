import json

import pytest

from coremarket.cli import build_parser, main
from coremarket.fileio import parse_market, serialize_market
from coremarket.reductions import SimpleDigraph, gadget_arc_in_core

TRIANGLE_MARKET = "market v1\nagent a\nagent b\nagent c\nlist a : b\nlist b : c\nlist c : a\n"


@pytest.fixture
def files(tmp_path):
    def write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate(capsys, files):
    code, out, _ = run(capsys, "validate", files("m.market", TRIANGLE_MARKET))
    assert code == 0 and "3 agents" in out and "strict" in out
    code, out, _ = run(capsys, "validate", "--json", files("m.market", TRIANGLE_MARKET))
    assert json.loads(out)["size"] == 9


def test_bad_input_exits_two(capsys, files):
    code, _, err = run(capsys, "validate", files("bad.market", "market v1\nagent a\nlist a : zz\n"))
    assert code == 2 and err.startswith("error:")
    code, _, err = run(capsys, "validate", "/nonexistent/file.market")
    assert code == 2


def test_ttc_and_check_core(capsys, files):
    m = files("m.market", TRIANGLE_MARKET)
    code, out, _ = run(capsys, "ttc", "--certify", m)
    assert code == 0
    assert out == "a -> b\nb -> c\nc -> a\n"
    alloc = files("x.alloc", out)
    assert run(capsys, "check-core", m, alloc)[:2] == (0, "InCore\n")
    assert run(capsys, "check-strict-core", m, alloc)[:2] == (0, "InStrictCore\n")
    code, out, _ = run(capsys, "check-core", "--json", m, files("id.alloc", ""))
    assert code == 1
    assert json.loads(out) == {"ok": False, "verdict": "Blocked", "witness": ["a", "b", "c"]}


def test_hm_improve(capsys, files):
    m = files("m.market", "market v1\nagent a\nagent b\nagent c\nlist a : c\nlist b : c\nlist c : b\n")
    m2 = files("m2.market", "market v1\nagent a\nagent b\nagent c\nlist a : c\nlist b : c\nlist c : a > b\n")
    x = files("x.alloc", "b -> c\nc -> b\n")
    code, out, _ = run(capsys, "hm-improve", m, m2, "--p", "a", "--allocation", x, "--json")
    assert code == 0
    assert json.loads(out)["a"] == "c"
    code, _, err = run(capsys, "hm-improve", m2, m, "--p", "a", "--allocation", x)
    assert code == 2


def test_roommates_commands(capsys, files):
    pair = files("i.market", "market v1\nagent a\nagent b\nlist a : b\nlist b : a\n")
    code, out, _ = run(capsys, "sr-solve", pair)
    assert (code, out) == (0, "a -- b\n")
    m = files("m.match", out)
    assert run(capsys, "sr-check", pair, m)[:2] == (0, "Stable\n")
    assert run(capsys, "sr-check", "--strong", pair, files("e.match", ""))[:2] == (1, "WeaklyBlocked: a b\n")
    odd = files("odd.market", "market v1\nagent a\nagent b\nagent c\n"
                              "list a : b > c\nlist b : c > a\nlist c : a > b\n")
    assert run(capsys, "sr-solve", odd)[:2] == (1, "NoStableMatching\n")


def test_sr_improve(capsys, files):
    I = files("i.market", "market v1\nagent p\nagent q\nagent r\nlist p : r\nlist r : p\n")
    I2 = files("i2.market", "market v1\nagent p\nagent q\nagent r\nlist p : r > q\nlist q : p\nlist r : p\n")
    M = files("m.match", "p -- r\n")
    code, out, _ = run(capsys, "sr-improve", I, I2, "--p", "p", "--q", "q", "--matching", M)
    assert (code, out) == (0, "p -- r\n")


def test_oracle_commands(capsys, files):
    m = files("m.market", TRIANGLE_MARKET)
    code, out, err = run(capsys, "oracle", "enumerate", m)
    assert code == 0 and out == "a->b b->c c->a\n" and "1 allocations" in err
    assert run(capsys, "oracle", "arc-in-core", m, "--arc", "a", "b")[:2] == (0, "yes\n")
    assert run(capsys, "oracle", "forbidden-arc", m, "--arc", "a", "b")[:2] == (1, "no\n")
    assert run(capsys, "oracle", "arc-in-core", m, "--arc", "a", "c")[0] == 2
    assert run(capsys, "oracle", "agent-trading", m, "--agent", "c")[0] == 0
    code, out, _ = run(capsys, "oracle", "max-core", "--json", m)
    assert json.loads(out)["opt"] == 3
    assert run(capsys, "oracle", "enumerate", "--cap", "2", m)[0] == 2


def test_oracle_decide(capsys, files):
    m = files("m.market", "market v1\nagent a\nagent b\nagent c\nlist a : b\nlist b : c\nlist c : b\n")
    m2 = files("m2.market", "market v1\nagent a\nagent b\nagent c\nlist a : b\nlist b : a > c\nlist c : b\n")
    code, out, _ = run(capsys, "oracle", "decide", "psib", m, m2, "--p", "a", "--json")
    assert code == 0 and json.loads(out) == {"answer": True, "kind": "PSIB"}


def test_gen_commands(capsys, files, fixture_text):
    d = files("d.txt", "1 0\n")
    code, out, _ = run(capsys, "gen", "arc-in-core", d)
    assert code == 0 and out == fixture_text("gadget_arc_in_core_n1.market")
    assert parse_market(run(capsys, "gen", "forbidden-arc", d)[1]).n == 9
    assert parse_market(run(capsys, "gen", "maxcore", d)[1]).n == 16
    assert parse_market(run(capsys, "gen", "maxcore", d, "--epsilon", "1/2")[1]).n == 72
    assert parse_market(run(capsys, "gen", "maxcore", d, "--force-k", "2")[1]).n == 10
    assert run(capsys, "gen", "maxcore", d, "--epsilon", "1/5")[0] == 2
    code, before, err = run(capsys, "gen", "psib", d)
    assert code == 0 and "p = a*" in err
    after = run(capsys, "gen", "psib", d, "--improved")[1]
    H, _ = gadget_arc_in_core(SimpleDigraph(1, ()))
    assert after == serialize_market(H) and before != after
    assert run(capsys, "gen", "arc-in-core", files("loop.txt", "1 1\n1 1\n"))[0] == 2


def test_gen_random_matches_golden(capsys, fixture_text):
    code, out, _ = run(capsys, "gen", "random", "--n", "6", "--seed", "42")
    assert code == 0 and out == fixture_text("random_seed42_n6_strict.market")


def test_search_command(capsys):
    code, out, _ = run(capsys, "search", "sr-unsolvable", "--json")
    assert code == 0
    found = json.loads(out)
    assert found["p"] == "p" and found["q"] == "q"
    assert run(capsys, "search", "core-worst", "--max-tries", "1")[0] == 1


def test_bench_command(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", "500", "1000", "--repeat", "1", "--instances", "1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "algorithm,target,size,seconds"
    assert len(lines) == 5


def _commands(parser, prefix=()):
    for action in parser._subparsers._group_actions if parser._subparsers else ():
        for name, sub in action.choices.items():
            if sub._subparsers:
                yield from _commands(sub, prefix + (name,))
            else:
                yield prefix + (name,)


@pytest.mark.parametrize("cmd", list(_commands(build_parser())), ids=" ".join)
def test_every_command_has_help(capsys, cmd):
    with pytest.raises(SystemExit) as e:
        main(list(cmd) + ["--help"])
    assert e.value.code == 0
    assert "usage: coremarket" in capsys.readouterr().out

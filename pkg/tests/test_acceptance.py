"""Exit criteria for the build; each test records one PASS/FAIL line."""
import io
import itertools
import os
import subprocess
import sys
from contextlib import contextmanager

from gradedflow import semiring
from gradedflow.cli import run_cli
from gradedflow.evaluator import BoxV, IntV, eval_term
from gradedflow.parser import parse_term
from gradedflow.semiring import PRIVATE, PUBLIC, SemiringTag
from gradedflow.syntax import Endorse, Reveal, Var, subst
from gradedflow.typechecker import TypeCheckError, check_program
from gradedflow.verify import CONF_SIGNATURE, INTEG_SIGNATURE, fuzz_confidentiality, fuzz_integrity

from conftest import ACCEPTANCE_RESULTS, CORPUS, ROOT, load


@contextmanager
def criterion(n: int, text: str):
    try:
        yield
    except BaseException:
        ACCEPTANCE_RESULTS[n] = (False, text)
        print(f"[FAIL] criterion {n}: {text}")
        raise
    ACCEPTANCE_RESULTS[n] = (True, text)
    print(f"[PASS] criterion {n}: {text}")


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    cwd = os.getcwd()
    os.chdir(ROOT)
    try:
        status = run_cli(list(argv), out, err)
    finally:
        os.chdir(cwd)
    return status, out.getvalue(), err.getvalue()


def rejection_code(name: str) -> str:
    try:
        check_program(load(name))
    except TypeCheckError as exc:
        return exc.code
    return "accepted"


def test_1_corpus_acceptance():
    with criterion(1, "Patient, meanAge and trusted addPatient type check; meanAge of ages 30 and 40 prints [35]"):
        for name in ("patient.gg", "meanAge.gg", "addPatient.gg"):
            assert cli("check", f"corpus/{name}") == (0, f"OK corpus/{name}\n", ""), name
        expected = f"[{(30 + 40) // 2}]\n"
        assert cli("run", "corpus/meanAge.gg", "--main", "meanAgeOfTwo", "--arg", "30", "--arg", "40") == (
            0, expected, ""
        )


def test_2_corpus_rejection():
    with criterion(2, "leak E104, untrusted name E102, trust of local E105, smuggled trust rejected (4/4)"):
        codes = {
            "leak.gg": rejection_code("leak.gg"),
            "addPatientUntrusted.gg": rejection_code("addPatientUntrusted.gg"),
            "launder.gg": rejection_code("launder.gg"),
            "smuggle.gg": rejection_code("smuggle.gg"),
        }
        assert codes == {
            "leak.gg": "E104",
            "addPatientUntrusted.gg": "E102",
            "launder.gg": "E105",
            "smuggle.gg": "E102",
        }
        status, _, err = cli("check", "corpus/leak.gg")
        assert status == 1 and err.startswith("corpus/leak.gg:2:14: error[E104]: ")


def _laws_hold(carrier, t):
    add, mul, leq = semiring.add, semiring.mul, semiring.leq
    z, o = semiring.zero(t), semiring.one(t)
    for a in carrier:
        assert add(a, z) == a and mul(a, o) == a == mul(o, a) and mul(a, z) == z == mul(z, a)
        assert leq(a, a)
    for a, b, c in itertools.product(carrier, repeat=3):
        assert add(a, b) == add(b, a)
        assert add(add(a, b), c) == add(a, add(b, c))
        assert mul(mul(a, b), c) == mul(a, mul(b, c))
        assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))
        assert mul(add(a, b), c) == add(mul(a, c), mul(b, c))
        if leq(a, b) and leq(b, c):
            assert leq(a, c)


def test_3_semiring_laws():
    with criterion(3, "semiring axioms exhaustive on Security, sampled on Usage n <= 16, monotonicity, 0 = Private, 1 = Public"):
        sec = semiring.carrier(SemiringTag.SECURITY)
        _laws_hold(sec, SemiringTag.SECURITY)
        for a, b, c in itertools.product(sec, repeat=3):
            if semiring.leq(a, b):
                assert semiring.leq(semiring.add(a, c), semiring.add(b, c))
                assert semiring.leq(semiring.mul(a, c), semiring.mul(b, c))
        assert semiring.zero(SemiringTag.SECURITY) == PRIVATE
        assert semiring.one(SemiringTag.SECURITY) == PUBLIC
        assert semiring.leq(PRIVATE, PUBLIC) and not semiring.leq(PUBLIC, PRIVATE)
        _laws_hold(semiring.carrier(SemiringTag.USAGE, 16), SemiringTag.USAGE)


def test_4_flatten():
    with criterion(4, "flat : (Int [Private]) [Public] -> Int [Private] accepted, mirror rejected, Public * Private = Private"):
        assert rejection_code("flatten.gg") == "accepted"
        assert rejection_code("flattenBad.gg") == "E104"
        assert semiring.mul(PUBLIC, PRIVATE) == PRIVATE


def test_5_monad_laws():
    with criterion(5, "laws --trials 200 --seed 0 reports 0 failures; hand instances evaluate to [10] and [5]"):
        status, out, _ = cli("laws", "--trials", "200", "--seed", "0")
        assert status == 0
        assert "failures: 0" in out.splitlines()
        s = parse_term("trust 9")
        b = parse_term("[ (let [v] = reveal x in v) + 1 ]")
        assert eval_term(Endorse(Reveal(s), "x", b)) == BoxV(IntV(10))
        assert eval_term(subst(b, "x", s)) == BoxV(IntV(10))
        e = parse_term("[5]")
        assert eval_term(Endorse(e, "x", Reveal(Var("x")))) == BoxV(IntV(5)) == eval_term(e)


def _corpus_functions(signature):
    found = []
    for path in sorted(CORPUS.glob("*.gg")):
        prog = load(path.name)
        try:
            check_program(prog)
        except TypeCheckError:
            continue
        found += [(path.name, d.name) for d in prog.functions if d.signature == signature]
    return found


def test_6_noninterference():
    with criterion(6, "corpus conf/integ functions pass 100 fuzz trials; both bypassed witnesses fail"):
        conf = _corpus_functions(CONF_SIGNATURE)
        integ = _corpus_functions(INTEG_SIGNATURE)
        assert len(conf) >= 3 and len(integ) >= 2
        for mode, fns in (("conf", conf), ("integ", integ)):
            for file, fn in fns:
                status, out, _ = cli("fuzz-ni", f"corpus/{file}", "--fn", fn, "--mode", mode, "--trials", "100")
                assert status == 0 and "failures: 0" in out.splitlines(), (file, fn)
        assert fuzz_confidentiality(load("leak.gg"), "leak", 100, 0, unchecked=True).failures
        assert fuzz_integrity(load("launder.gg"), "taint", 100, 0, unchecked=True).failures


def test_7_linearity():
    with criterion(7, "bad x = x + x rejected E103; twice : Int [2] accepted; once : Int [2] rejected (3/3)"):
        assert rejection_code("bad.gg") == "E103"
        assert rejection_code("twice.gg") == "accepted"
        assert rejection_code("once.gg") == "E104"


DETERMINISM_SCRIPT = r"""
import io, sys
from pathlib import Path
from gradedflow.cli import run_cli

files = sorted(str(p) for p in Path("corpus").glob("*.gg"))
runs = [["check", *files],
        ["run", "corpus/meanAge.gg", "--main", "meanAgeOfTwo", "--arg", "30", "--arg", "40"],
        ["fuzz-ni", "corpus/noninterference.gg", "--fn", "const42", "--mode", "conf", "--seed", "11"],
        ["fuzz-ni", "corpus/noninterference.gg", "--fn", "seedFrom", "--mode", "integ", "--seed", "11"],
        ["laws", "--trials", "200", "--seed", "7"],
        ["bogus"]]
for argv in runs:
    out, err = io.StringIO(), io.StringIO()
    status = run_cli(argv, out, err)
    sys.stdout.write(f"$ {' '.join(argv)}\n{out.getvalue()}{err.getvalue()}status {status}\n")
"""


def test_8_determinism():
    with criterion(8, "two runs with fixed seeds give byte-identical CLI output"):
        outputs = []
        for hashseed in ("1", "2"):
            env = {**os.environ, "PYTHONHASHSEED": hashseed}
            proc = subprocess.run(
                [sys.executable, "-c", DETERMINISM_SCRIPT], cwd=ROOT, env=env, capture_output=True, check=True
            )
            outputs.append(proc.stdout)
        assert outputs[0] == outputs[1]
        assert b"status 5" in outputs[0] and b"[35]" in outputs[0]

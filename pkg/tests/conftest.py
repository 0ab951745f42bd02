import pathlib

import pytest

from gdasp import compile_duals, parse_program, parse_query
from gdasp.solver import Solver, run_with_stack

CORPUS = pathlib.Path(__file__).parent / "corpus"

# criterion number -> (label, passed, detail)
ACCEPTANCE: dict = {}


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


def solve_text(source: str, query: str | None = None, limit: int = 0, raw: bool = False, **kwargs):
    """All (or ``limit``) answers; runs on a large stack so deep proofs are safe."""
    program = parse_program(source)
    q = parse_query(query) if query is not None else program.query
    solver = Solver(compile_duals(program, raw), **kwargs)
    return run_with_stack(lambda: list(solver.solve(q, limit)))


def record(number: int, label: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = (label, passed, detail)


@pytest.fixture
def corpus():
    return corpus_text


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        label, passed, detail = ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number}: {label}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)


def random_program(rng, atoms: int = 8, rules: int = 12, body: int = 2, denials: int = 0) -> str:
    """A random propositional program over atoms a0..a{atoms-1}."""
    names = [f"a{i}" for i in range(atoms)]

    def lit():
        return ("not " if rng.random() < 0.5 else "") + rng.choice(names)

    lines = []
    for _ in range(rng.randint(1, rules)):
        head = rng.choice(names)
        items = [lit() for _ in range(rng.randint(0, body))]
        lines.append(f"{head} :- {', '.join(items)}." if items else f"{head}.")
    for _ in range(denials):
        lines.append(f":- {', '.join(lit() for _ in range(rng.randint(1, body)))}.")
    return "\n".join(lines)


def oracle_disagreements(source: str, queries) -> list[str]:
    """Compare solver answers with brute-force stable models for each ground query."""
    from gdasp.oracle import atom_key, program_models

    models = program_models(parse_program(source))
    problems = []
    for q in queries:
        naf = q.startswith("not ")
        atom = q[4:] if naf else q
        expected = any((atom in m) != naf for m in models)
        answers = solve_text(source, f"?- {q}.", limit=0)
        if bool(answers) != expected:
            problems.append(f"{q}: solver {bool(answers)}, oracle {expected}")
        for a in answers:
            pos = {atom_key(lit) for lit in a.model if not lit.naf}
            neg = {atom_key(lit) for lit in a.model if lit.naf}
            if not any(pos <= m and not (neg & m) for m in models):
                problems.append(f"{q}: model {sorted(pos)} / not {sorted(neg)} fits no stable model")
    return problems

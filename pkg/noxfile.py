"""Configuration for the nox test runner."""

from __future__ import annotations

import nox

# Use uv to manage virtual environments for faster setup
nox.options.default_venv_backend = "uv"
nox.options.sessions = ["tests", "lint", "type_check"]

_TEST_DEPS = ("pytest", "hypothesis", "pytest-cov", "pytest-randomly", "pytest-xdist")


@nox.session(python=["3.12", "3.13", "3.14"])
def tests(session: nox.Session) -> None:
    """Run the test suite without the slow reproduction runs."""
    session.install(*_TEST_DEPS)
    session.install(".")

    # Enforce a coverage floor in CI so coverage cannot silently regress.
    session.run("pytest", "-m", "not slow", "--cov=blochmodes", "--cov-branch", "--cov-fail-under=85")


@nox.session
def reproduction(session: nox.Session) -> None:
    """Run the slow reproduction tests on the fifty-cell medium."""
    session.install(*_TEST_DEPS)
    session.install(".")
    session.run("pytest", "-m", "slow", "-n", "auto")


@nox.session
def lint(session: nox.Session) -> None:
    """Run linting using ruff."""
    session.install("ruff")
    session.run("ruff", "check", ".")


@nox.session
def type_check(session: nox.Session) -> None:
    """Run static type checking using basedpyright and mypy."""
    # Install the type checkers and the package (so dependencies are available for type checking)
    session.install("basedpyright", "mypy")
    session.install(".")
    session.run("basedpyright")
    session.run("mypy")

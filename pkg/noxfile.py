import nox


@nox.session()
@nox.parametrize("numpy", ["1.26.4", "2.0.2"])
def tests(session, numpy):
    session.install(f"numpy=={numpy}")
    session.install(".")
    session.install("pytest")
    session.install("pytest-mock")
    session.run("pytest")

"""Exception hierarchy shared by all modules."""


class ModTVError(Exception):
    exit_code = 1


class DomainError(ModTVError, ValueError):
    exit_code = 2


class SingularityError(ModTVError, ValueError):
    exit_code = 2


class ValidationError(ModTVError, ValueError):
    exit_code = 2


class ClassError(ModTVError, ValueError):
    """Operation requires a different tetrahedron class."""

    exit_code = 2


class AccuracyError(ModTVError, RuntimeError):
    exit_code = 3


class ContourError(AccuracyError):
    pass


class SolverError(ModTVError, RuntimeError):
    exit_code = 3


class RankError(SolverError):
    pass

"""Exception hierarchy shared across the package."""


class DistragError(Exception):
    """Base class for every error raised by distrag."""


# -- gazetteer / geocoding -------------------------------------------------


class GazetteerError(DistragError):
    pass


class MissingFile(GazetteerError, FileNotFoundError):
    pass


class MalformedRow(GazetteerError):
    def __init__(self, line, reason=""):
        self.line = line
        self.reason = reason
        super().__init__(f"malformed row at line {line}: {reason}".rstrip(": "))


class DuplicateCity(GazetteerError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"duplicate city key {key!r}")


class EmptyGazetteer(GazetteerError):
    pass


# -- network ---------------------------------------------------------------


class NetworkError(DistragError):
    pass


class RateLimited(NetworkError):
    def __init__(self, retry_after=None):
        self.retry_after = retry_after
        super().__init__(f"rate limited (retry after {retry_after}s)")


class EmptyResult(DistragError):
    pass


class AuthError(DistragError):
    pass


class BadDimension(DistragError):
    pass


# -- graph -----------------------------------------------------------------


class GraphError(DistragError):
    pass


class TooFewCities(GraphError):
    pass


class UnknownCity(GraphError, KeyError):
    def __init__(self, key):
        self.key = key
        super().__init__(key)

    def __str__(self):
        return f"unknown city {self.key!r}"


class TurtleSyntaxError(GraphError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ConflictingDistance(GraphError):
    def __init__(self, a, b, first, second):
        self.a, self.b = a, b
        super().__init__(f"conflicting distances for {a!r}-{b!r}: {first} vs {second}")


# -- retrieval -------------------------------------------------------------


class EmptyIndex(DistragError):
    pass


# -- sparql ----------------------------------------------------------------


class SparqlError(DistragError):
    pass


class SparqlSyntaxError(SparqlError):
    def __init__(self, position, expected, found=None):
        self.position = position
        self.expected = expected
        self.found = found
        msg = f"at offset {position}: expected {expected}"
        if found is not None:
            msg += f", found {found!r}"
        super().__init__(msg)


class UnknownPrefix(SparqlError):
    def __init__(self, prefix):
        self.prefix = prefix
        super().__init__(f"undeclared prefix {prefix!r}")


class UnsupportedFeature(SparqlError):
    def __init__(self, token):
        self.token = token
        super().__init__(f"unsupported SPARQL feature {token!r}")


class SparqlTypeError(SparqlError, TypeError):
    def __init__(self, expr, detail=""):
        self.expr = expr
        super().__init__(f"type error in {expr}: {detail}".rstrip(": "))


# -- llm gateway -----------------------------------------------------------


class TemplateError(DistragError):
    pass


class MissingSlot(TemplateError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"missing binding for slot {name!r}")


class UnknownSlot(TemplateError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"template has no slot {name!r}")


class ReplayMiss(DistragError):
    def __init__(self, digest):
        self.digest = digest
        super().__init__(f"no recorded response for prompt sha256={digest}")


# -- questions -------------------------------------------------------------


class QuestionError(DistragError):
    pass


class InsufficientGraph(QuestionError):
    pass


class MissingEdge(QuestionError):
    def __init__(self, a, b):
        self.a, self.b = a, b
        super().__init__(f"no edge between {a!r} and {b!r}")


class NoCandidates(QuestionError):
    pass


# -- config ----------------------------------------------------------------


class ConfigError(DistragError):
    pass

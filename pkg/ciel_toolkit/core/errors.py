"""
Exception hierarchy for the CIEL reasoning toolkit
"""


class CielError(Exception):
    """Base class for every error raised by the toolkit"""


class FormulaSyntaxError(CielError):
    """Formula text could not be parsed"""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ResourceLimitError(CielError):
    """A configured size cap was exceeded"""

    def __init__(self, limit, value, cap):
        self.limit = limit
        self.value = value
        self.cap = cap
        super().__init__(f"resource limit '{limit}' exceeded: {value} > {cap}")


class UnknownWorldError(CielError):
    """A world identifier is not part of the model"""

    def __init__(self, world):
        self.world = world
        super().__init__(f"unknown world: {world}")


class ModelValidationError(CielError):
    """A model file or relation violates the model invariants"""

    def __init__(self, agent, pair, reason):
        self.agent = agent
        self.pair = pair
        self.reason = reason
        message = f"agent '{agent}': {reason}"
        if pair is not None:
            message += f" (offending pair {pair})"
        super().__init__(message)


class ModelFileError(CielError):
    """A model file is not JSON in the model file schema"""

    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"model file {path}: {reason}")


class UnsatisfiableTheoryError(CielError):
    """The background agent theory has no satisfying valuation"""


class TranslationError(CielError):
    """Base class for translation failures"""


class MissingAgentAtomError(TranslationError):
    """A p_<name> atom is not interpreted by the agent model"""


class EmptyGroupError(TranslationError):
    """A C-index denotes the empty set of agents"""

    def __init__(self, index_text):
        self.index_text = index_text
        super().__init__(f"index '{index_text}' denotes no agent; GEL groups must be nonempty")


class ReservedNameError(TranslationError):
    """A user identifier collides with a reserved name"""


class IllFormedFixpointError(CielError):
    """The fixpoint variable occurs negatively under nu"""


class DerivationFormatError(CielError):
    """A proof file line could not be read"""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)

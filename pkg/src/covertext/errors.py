"""Exception hierarchy shared across the toolkit."""


class CovertextError(Exception):
    """Base class for all toolkit errors."""


class VocabularyError(CovertextError):
    """Invalid vocabulary construction or lookup."""


class DistributionError(CovertextError):
    """A next-token distribution violates its invariants."""


class ProviderError(CovertextError):
    """A distribution provider failed to answer."""


class ContextWindowExceeded(ProviderError):
    """The context is longer than the provider's window; never truncated silently."""


class ProtocolError(ProviderError):
    """Malformed frame, version mismatch, or invalid response from a remote provider."""


class NondeterministicServer(ProviderError):
    """The probe-replay check at session start returned differing responses."""


class CoderError(CovertextError):
    """Base class for encode/decode failures."""


class IntervalExhaustion(CoderError):
    """The truncated support no longer fits in the coder interval (precision too small)."""


class SupportMismatch(CoderError):
    """A cover token fell outside the step's truncated support (provider/policy mismatch)."""


class FramingError(CoderError):
    """The length header is inconsistent with the recovered bits."""


class PatienceExhausted(CoderError):
    """Patient coding failed its divergence test too many consecutive steps."""


class PipelineError(CovertextError):
    """A hide/reveal stage failed; carries the failing stage name."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class SessionMismatch(CovertextError):
    """Session fingerprints disagree; aborting before decoding garbage."""


class InputError(CovertextError):
    """Unreadable or malformed operator input (files, specs, flags)."""

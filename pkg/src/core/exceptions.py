EXIT_OK = 0
EXIT_VERIFICATION_FAILURE = 1
EXIT_CONFIGURATION_ERROR = 2
EXIT_REMOTE_FAILURE = 3


class HarnessError(Exception):
    exit_code: int = EXIT_VERIFICATION_FAILURE


class ConfigurationError(HarnessError):
    exit_code = EXIT_CONFIGURATION_ERROR


class UnknownGame(ConfigurationError):
    pass


class UnsupportedGame(ConfigurationError):
    pass


class IllegalMove(HarnessError):
    pass


class NotTerminal(HarnessError):
    pass


class TerminalState(HarnessError):
    pass


class AlphaOutOfRange(HarnessError):
    pass


class GameTooLarge(HarnessError):
    pass


class UnknownOption(HarnessError):
    pass


class RoleMismatch(HarnessError):
    pass


class TurnNotOwnedByEgo(HarnessError):
    pass


class VersionMismatch(HarnessError):
    pass


class RemoteUnavailable(HarnessError):
    exit_code = EXIT_REMOTE_FAILURE

    def __init__(self, message: str, attempts: int = 0) -> None:
        super().__init__(message)
        self.attempts = attempts


class RemoteTimeout(RemoteUnavailable):
    pass


class JudgeUnavailable(RemoteUnavailable):
    pass


class CorruptRecord(HarnessError):
    def __init__(self, path: str, line_no: int, reason: str) -> None:
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no


class ReplayMismatch(HarnessError):
    def __init__(self, trajectory_id: str, turn: int, detail: str) -> None:
        super().__init__(f"trajectory {trajectory_id} diverges at turn {turn}: {detail}")
        self.trajectory_id = trajectory_id
        self.turn = turn
        self.detail = detail

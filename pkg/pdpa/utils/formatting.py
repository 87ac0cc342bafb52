def format_token(text: str) -> str:
    return text.strip() \
               .replace(" ", "") \
               .replace("\n", "") \
               .replace("\r", "") \
               .lower()


def format_real(value: float) -> str:
    """Observables: fixed nine decimals."""
    return "%.9f" % value


def format_frequency(value: float) -> str:
    """Histogram entries; an empty bin prints as a bare 0."""
    if value == 0.0:
        return "0"
    return "%.9f" % value


def format_param(value: float) -> str:
    """Parameter axes (T, L): nine significant digits, no trailing zeros."""
    return "%.9g" % value


def split_list(text: str) -> list[str]:
    """Comma-separated tokens; a ``custom:`` scheme keeps its own commas."""
    text = format_token(text)
    if not text:
        return []
    if text.startswith("custom:"):
        return [text]
    return [token for token in text.split(",") if token]


def parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(token) for token in split_list(text))


def parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(token) for token in split_list(text))

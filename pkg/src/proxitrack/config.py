"""Flat `key = value` config files with `#` comments."""


def parse_config_text(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        values[key] = value.strip()
    return values


class Config:
    """Typed access over parsed key/value pairs."""

    def __init__(self, values=None):
        self.values = dict(values or {})

    @classmethod
    def from_file(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls(parse_config_text(fh.read()))

    def has(self, key):
        return key in self.values

    def get_str(self, key, default=None):
        return self.values.get(key, default)

    def get_int(self, key, default=None):
        if key not in self.values:
            return default
        try:
            return int(self.values[key])
        except ValueError:
            raise ValueError(f"config key {key!r}: not an integer: {self.values[key]!r}")

    def get_float(self, key, default=None):
        if key not in self.values:
            return default
        try:
            return float(self.values[key])
        except ValueError:
            raise ValueError(f"config key {key!r}: not a number: {self.values[key]!r}")

    def get_bool(self, key, default=None):
        if key not in self.values:
            return default
        text = self.values[key].lower()
        if text in ("true", "yes", "on", "1"):
            return True
        if text in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"config key {key!r}: not a boolean: {self.values[key]!r}")

    def get_floats(self, key, default=None):
        """Whitespace-separated list of numbers."""
        if key not in self.values:
            return default
        try:
            return [float(p) for p in self.values[key].split()]
        except ValueError:
            raise ValueError(f"config key {key!r}: not numbers: {self.values[key]!r}")

# Entry script wrapping a generated adaptation manager in the line protocol.
import importlib
import json
import os
import sys
import traceback

_out = sys.stdout
sys.stdout = sys.stderr  # prints from the AM must not corrupt the protocol
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

MODULE = "{{MODULE}}"
BASE = "{{BASE}}"
CLASS = "{{CLASS}}"
GENERATED = "{{GENERATED}}"


def _send(record):
    _out.write(json.dumps(record) + "\n")
    _out.flush()


def _plain(value):
    if isinstance(value, dict) and set(value) == {"ref"}:
        return value["ref"]
    return value


class Observed:
    def __init__(self, attrs):
        for key, value in attrs.items():
            setattr(self, key, _plain(value))

    def __repr__(self):
        return "Observed(%r)" % self.__dict__


class Component(Observed):
    def __init__(self, ident, attrs):
        super().__init__(attrs)
        self.id = ident

    def __repr__(self):
        return "Component(%r)" % self.__dict__


class Environment:
    def __init__(self, beyond_control):
        self._assignments = []
        for name, attrs in beyond_control.items():
            setattr(self, name, Observed(attrs))

    def assign_group(self, component, group_id):
        ident = component.id if isinstance(component, Component) else component
        self._assignments.append((ident, group_id))


def _assignments_line(pairs):
    body = ", ".join(json.dumps(str(k)) + ": " + json.dumps(v) for k, v in pairs)
    return '{"assignments": {' + body + "}}"


def main():
    try:
        module = importlib.import_module(GENERATED)
        cls = getattr(module, CLASS, None)
        if cls is None:
            _send({"ready": False, "error": {"message": "class `%s` was not found in the generated code" % CLASS, "traceback": ""}})
            return
        base = getattr(importlib.import_module(MODULE), BASE)
        if not (isinstance(cls, type) and issubclass(cls, base)):
            _send({"ready": False, "error": {"message": "class `%s` is not derived from `%s.%s`" % (CLASS, MODULE, BASE), "traceback": ""}})
            return
        am = cls()
    except BaseException as exc:
        _send({"ready": False, "error": {"message": "%s: %s" % (type(exc).__name__, exc), "traceback": traceback.format_exc()}})
        return
    _send({"ready": True, "am": CLASS})
    for line in sys.stdin:
        if not line.strip():
            continue
        request = json.loads(line)
        env = Environment(request.get("beyond_control", {}))
        components = [Component(c["id"], c.get("attrs", {})) for c in request["components"]]
        try:
            getattr(am, request["method"])(components, env, list(request["group_ids"]), request["step"])
        except BaseException as exc:
            _send({"error": {"message": "%s: %s" % (type(exc).__name__, exc), "traceback": traceback.format_exc()}})
            continue
        try:
            reply = _assignments_line(env._assignments)
        except TypeError as exc:
            _send({"error": {"message": "group ids must be strings: %s" % exc, "traceback": ""}})
            continue
        _out.write(reply + "\n")
        _out.flush()


if __name__ == "__main__":
    main()

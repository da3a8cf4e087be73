"""JSON schemas for experiment configs, one ``params`` schema per command."""

NUMBER_OR_LIST = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 1},
    ]
}

GRID = {
    "oneOf": [
        {"type": "array", "items": {"type": "number"}, "minItems": 1},
        {
            "type": "object",
            "properties": {"start": {"type": "number"}, "stop": {"type": "number"}, "num": {"type": "integer", "minimum": 1}},
            "required": ["start", "stop", "num"],
            "additionalProperties": False,
        },
    ]
}

AR1 = {
    "type": "object",
    "properties": {
        "mu": {"type": "number"},
        "rho": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
        "n_states": {"type": "integer", "minimum": 1},
        "sigma_beta": {"type": "number", "minimum": 0},
        "sigma_eps": {"type": "number", "minimum": 0},
    },
    "required": ["mu", "rho", "n_states"],
    "oneOf": [{"required": ["sigma_beta"]}, {"required": ["sigma_eps"]}],
    "additionalProperties": False,
}

CHAIN = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "states": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "transition": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}},
                    "minItems": 1,
                },
            },
            "required": ["states", "transition"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"ar1": AR1},
            "required": ["ar1"],
            "additionalProperties": False,
        },
    ]
}

# discount factor per exogenous state; "states" means beta(z) = z
BETA = {"oneOf": [NUMBER_OR_LIST, {"const": "states"}]}

UTILITY = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["log", "crra", "linear"]},
        "gamma": {"type": "number", "exclusiveMinimum": 0},
        "eps": {"type": "number", "minimum": 0},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

PRODUCTION = {
    "type": "object",
    "properties": {
        "kind": {"const": "cobb_douglas"},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    },
    "required": ["kind", "alpha"],
    "additionalProperties": False,
}

METHOD = {"enum": ["vfi", "howard"]}

WEIGHTS = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["beta", "ez", "growth", "return"]},
        "theta": {"type": "number"},
        "alpha": NUMBER_OR_LIST,
        "R": NUMBER_OR_LIST,
        "gamma": {"type": "number"},
    },
    "required": ["kind"],
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "ez"}}}, "then": {"required": ["theta"]}},
        {"if": {"properties": {"kind": {"const": "growth"}}}, "then": {"required": ["alpha", "theta"]}},
        {"if": {"properties": {"kind": {"const": "return"}}}, "then": {"required": ["R", "gamma"]}},
    ],
}


def _obj(props, required):
    return {"type": "object", "properties": props, "required": required, "additionalProperties": False}


PARAMS = {
    "spectral": _obj(
        {"chain": CHAIN, "beta": BETA, "weights": WEIGHTS, "n_max": {"type": "integer", "minimum": 1}},
        ["chain"],
    ),
    "rouwenhorst": AR1,
    "figure-r": _obj(
        {
            "mu": {"type": "number"},
            "n_states": {"type": "integer", "minimum": 1},
            "rho_grid": GRID,
            "sigma_grid": GRID,
            "n_max": {"type": "integer", "minimum": 1},
        },
        [],
    ),
    "solve-growth": _obj(
        {"k_grid": GRID, "chain": CHAIN, "beta": BETA, "production": PRODUCTION, "utility": UTILITY, "method": METHOD},
        ["k_grid", "chain", "beta"],
    ),
    "solve-search": _obj(
        {"wages": NUMBER_OR_LIST, "c": {"type": "number", "minimum": 0}, "chain": CHAIN, "beta": BETA, "method": METHOD},
        ["wages", "c", "chain", "beta"],
    ),
    "solve-tax": _obj(
        {
            "b_grid": GRID,
            "chain": CHAIN,
            "beta": BETA,
            "R": NUMBER_OR_LIST,
            "P": NUMBER_OR_LIST,
            "T": NUMBER_OR_LIST,
            "utility": UTILITY,
            "method": METHOD,
        },
        ["b_grid", "chain", "beta", "R", "P", "T"],
    ),
    "solve-ez": _obj(
        {
            "x_grid": GRID,
            "chain": CHAIN,
            "beta": BETA,
            "d": NUMBER_OR_LIST,
            "p": NUMBER_OR_LIST,
            "rho_pref": {"type": "number"},
            "gamma": {"type": "number", "exclusiveMaximum": 1},
            "eps": {"type": "number", "exclusiveMinimum": 0},
            "method": METHOD,
        },
        ["x_grid", "chain", "beta", "d", "p", "rho_pref", "gamma"],
    ),
    "solve-homogeneous": _obj(
        {
            "gamma": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "R": NUMBER_OR_LIST,
            "beta": BETA,
            "chain": CHAIN,
            "s_grid": GRID,
            "method": METHOD,
        },
        ["gamma", "R", "beta", "chain", "s_grid"],
    ),
    "solve-truncated": _obj(
        {
            "chain": CHAIN,
            "beta": BETA,
            "production": PRODUCTION,
            "utility": UTILITY,
            "ladder": {
                "oneOf": [
                    _obj({"bounds": {"type": "array", "items": {"type": "number"}, "minItems": 1}}, ["bounds"]),
                    _obj({"M": {"type": "number", "exclusiveMinimum": 0}, "levels": {"type": "integer", "minimum": 1}}, ["M"]),
                ]
            },
            "step": {"type": "number", "exclusiveMinimum": 0},
            "method": METHOD,
        },
        ["chain", "beta", "ladder", "step"],
    ),
    "oracle-check": _obj(
        {
            "instances": {"type": "integer", "minimum": 0},
            "seed": {"type": "integer", "minimum": 0},
            "negative_controls": {"type": "integer", "minimum": 0},
            "budget": {"type": "integer", "minimum": 1},
            "max_states": {"type": "integer", "minimum": 1, "maximum": 4},
            "max_actions": {"type": "integer", "minimum": 1, "maximum": 3},
            "max_shocks": {"type": "integer", "minimum": 1, "maximum": 3},
        },
        [],
    ),
}

CONFIG = {
    "type": "object",
    "properties": {
        "command": {"enum": sorted(PARAMS)},
        "params": {"type": "object"},
        "output": _obj({"path": {"type": "string"}, "format": {"enum": ["json", "csv"]}}, []),
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "max_iter": {"type": "integer", "minimum": 1},
        "spectral_tol": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["params"],
    "additionalProperties": False,
}

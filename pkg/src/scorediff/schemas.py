"""JSON schemas for the command-line reports."""
from __future__ import annotations

import jsonschema

_num = {"type": "number"}
_nnum = {"type": ["number", "null"]}
_prob = {"type": "number", "minimum": 0.0, "maximum": 1.0}
_int = {"type": "integer"}

DESCRIBE = {
    "type": "object",
    "required": ["seasons"],
    "properties": {
        "seasons": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["season", "n_matches", "mean", "sd", "skewness"],
                "properties": {
                    "season": {"type": "string"},
                    "n_matches": _int,
                    "mean": _num, "sd": _nnum, "skewness": _num,
                    "home_mean": _num, "home_var": _nnum,
                    "away_mean": _num, "away_var": _nnum,
                    "home_away_corr": _nnum, "draws": _int,
                },
            },
        }
    },
}

FIT_COMPARISON = {
    "type": "object",
    "required": ["models", "best"],
    "properties": {
        "best": {"type": "string"},
        "models": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label", "loglik", "n_params", "aic", "bic", "converged", "best", "file"],
                "properties": {
                    "label": {"type": "string"},
                    "loglik": _num, "n_params": _int, "aic": _num, "bic": _num,
                    "converged": {"type": "boolean"}, "best": {"type": "boolean"},
                    "gradient_norm": _num, "n_iter": _int, "file": {"type": "string"},
                    "diagnostics": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
    },
}

FIT_RESULT = {
    "type": "object",
    "required": ["structure", "index", "estimates", "vector", "loglik", "aic", "bic", "converged"],
    "properties": {
        "structure": {"type": "object", "required": ["kind", "family"]},
        "index": {"type": "object"},
        "estimates": {"type": "object", "required": ["abilities", "scales"]},
        "vector": {"type": "array", "items": {"type": ["number", "string"]}},
        "loglik": _num, "aic": _num, "bic": _num,
        "converged": {"type": "boolean"},
    },
}

SIMULATION = {
    "type": "object",
    "required": ["n_sims", "seed", "teams", "points_scheme"],
    "properties": {
        "n_sims": {"type": "integer", "minimum": 1},
        "seed": _int,
        "n_simulated_matches": _int,
        "n_relegated": _int,
        "points_scheme": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
        "teams": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["team", "expected_points", "ci_low", "ci_high",
                             "champion_prob", "relegation_prob"],
                "properties": {
                    "team": {"type": "string"},
                    "current_points": _num,
                    "expected_points": _num, "ci_low": _num, "ci_high": _num,
                    "champion_prob": _prob, "relegation_prob": _prob,
                    "expected_goal_diff": _num,
                },
            },
        },
    },
}

CONDITIONAL = {
    "type": "object",
    "required": ["home", "away", "half_diff", "final_diff", "pmf", "win", "draw", "loss"],
    "properties": {
        "home": {"type": "string"}, "away": {"type": "string"},
        "half_diff": _int,
        "final_diff": {"type": "array", "items": _int},
        "pmf": {"type": "array", "items": _prob},
        "win": _prob, "draw": _prob, "loss": _prob,
        "model": {"type": "string"},
    },
}

ECDF_BAND = {
    "type": "object",
    "required": ["n_reps", "seed", "level", "points"],
    "properties": {
        "n_reps": {"type": "integer", "minimum": 100},
        "seed": _int,
        "level": _prob,
        "points": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["z", "lower", "upper", "observed"],
                "properties": {"z": _int, "lower": _prob, "upper": _prob, "observed": _prob},
            },
        },
    },
}

EXPECTED_OUTCOMES = {
    "type": "object",
    "required": ["n_matches", "rows"],
    "properties": {
        "n_matches": _int,
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["source", "home_wins", "draws", "away_wins"],
                "properties": {"source": {"type": "string"}, "home_wins": _num,
                               "draws": _num, "away_wins": _num},
            },
        },
    },
}


def validate(doc, schema):
    """Raise :class:`jsonschema.ValidationError` if ``doc`` does not match."""
    jsonschema.validate(doc, schema)
    return doc

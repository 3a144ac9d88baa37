#pragma once

#include <stdexcept>
#include <string>

namespace escape {

// Base class for everything that can go wrong while a game is running.
struct GameError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A single move of the restricter exceeded its weight budget.
struct BudgetExceeded : GameError {
    using GameError::GameError;
};

// An obstruction with depth 0 (i.e. "forbid the current root") was submitted.
struct IllegalDepth : GameError {
    using GameError::GameError;
};

// Every child of the current root is blocked; the escape rule has no move.
struct NoSafeChild : GameError {
    using GameError::GameError;
};

// The exact weight accounting disagrees with itself; this is a bug trap and
// should never fire.
struct InvariantBroken : GameError {
    using GameError::GameError;
};

// A structural bound promised by the construction (e.g. "at most 3C forbidden
// vertices per move") failed to hold.
struct LemmaViolated : GameError {
    using GameError::GameError;
};

// A parameter set failed its certification inequality.
struct NotCertified : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed textual input (rationals, words, parameter files).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace escape

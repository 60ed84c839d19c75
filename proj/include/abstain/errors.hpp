#pragma once

#include <stdexcept>
#include <string>

namespace abstain {

// Bad caller input (config values, domain mismatches, exceeded budgets).
// The CLI maps this to exit code 1.
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A precondition between collaborating components was violated
// (out-of-order rounds, missing label on a predicted round, ...).
struct contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

// An object reached a state that the protocol rules out
// (empty hypothesis class in a realizable run, ...).
struct state_error : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace abstain

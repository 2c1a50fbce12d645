#pragma once

#include <stdexcept>
#include <string>

namespace rfmesh {

/// Invalid argument supplied to a design or configuration routine.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A caller broke an interface precondition (wrong state size, wrong length).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class EncodeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Channel estimate too weak to normalize; the frame is dropped.
class DegenerateChannelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rfmesh

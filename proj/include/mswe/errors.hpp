#ifndef MSWE_ERRORS_HPP
#define MSWE_ERRORS_HPP

#include <stdexcept>

namespace mswe {

/// A request that cannot be honored with the inputs given (missing
/// dependency, dataset lacking required fields). The CLI reports these as
/// usage errors.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mswe

#endif  // MSWE_ERRORS_HPP

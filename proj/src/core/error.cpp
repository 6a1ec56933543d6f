#include "core/error.hpp"

namespace lsfbm {

void throw_invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }
void throw_data(const std::string& what) { throw Error(ErrorKind::Data, what); }
void throw_numerical(const std::string& what) { throw Error(ErrorKind::Numerical, what); }

}  // namespace lsfbm

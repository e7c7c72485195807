#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lyapcert/lyapunov.hpp"

namespace lyapcert {

/// Malformed system or certificate text; line is 1-based (0 when not tied to a line).
class FormatError : public std::runtime_error {
public:
  FormatError(const std::string& what, std::size_t line);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

struct SystemFile {
  std::vector<std::string> vars;
  PolySystem system;
};

/// vars: x1 x2
/// mode: continuous | discrete
/// x1' = <expr>            (continuous; x1+ = <expr> for discrete)
/// x1+ = (<expr>) / (<expr>)
/// Blank lines and lines starting with # are ignored.
SystemFile parse_system(std::istream& in);
SystemFile read_system_file(const std::string& path);

struct CertificateFile {
  std::vector<std::string> vars;
  SystemMode mode = SystemMode::continuous;
  LyapunovCertificate cert;
};

void write_certificate(std::ostream& out, const CertificateFile& file);
CertificateFile parse_certificate(std::istream& in);
CertificateFile read_certificate_file(const std::string& path);
void write_certificate_file(const std::string& path, const CertificateFile& file);

std::string to_string(SystemMode m);
std::string to_string(Strictness s);

} // namespace lyapcert

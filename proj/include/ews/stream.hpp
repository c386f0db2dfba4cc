#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <ostream>
#include <string>

#include "ews/scenario.hpp"

namespace ews {

struct MonitorOptions {
  std::size_t queue_capacity = 1024;
  // Latest-wins: when records pile up behind a running evaluation, only the
  // newest is evaluated. Off by default so replays are lossless.
  bool coalesce = false;
};

class SourceError : public Error {
 public:
  using Error::Error;
};

// Evaluates one StreamRecord line and returns the report (or error) line.
std::string handle_record_line(const Design& design, const std::string& line, long line_no);

// Pulls lines until it returns false; throws SourceError on an unrecoverable read failure.
using LineSource = std::function<bool(std::string&)>;

// Returns 0 at end of input, 5 after a source failure.
int run_monitor(const Design& design, const LineSource& source, std::ostream& out,
                std::ostream& err, const MonitorOptions& opts = {});

int run_monitor_stdin(const Design& design, std::istream& in, std::ostream& out, std::ostream& err,
                      const MonitorOptions& opts = {});

// Accepts a single TCP connection on host:port and reads records from it.
int run_monitor_tcp(const Design& design, const std::string& host, unsigned short port,
                    std::ostream& out, std::ostream& err, const MonitorOptions& opts = {});

}  // namespace ews

#include "ews/stream.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <thread>

#include <boost/asio.hpp>

#include "ews/monitor.hpp"

namespace ews {
namespace {

using OrderedJson = nlohmann::ordered_json;

std::string error_line(long line_no, const std::string& what) {
  OrderedJson j;
  j["line"] = line_no;
  j["error"] = what;
  return j.dump();
}

Vector numbers(const Json& j, const char* key) {
  if (!j.is_array()) throw InvariantError(std::string("'") + key + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvariantError(std::string("'") + key + "' must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  if (!v.allFinite()) throw InvariantError(std::string("'") + key + "' has non-finite entries");
  return v;
}

template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(size_t capacity) : capacity_(std::max<size_t>(1, capacity)) {}

  void push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  // Blocks until an item is available or the queue is closed and drained.
  // With `latest` set, everything but the newest item is discarded.
  std::optional<T> pop(bool latest) {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    if (latest) {
      while (items_.size() > 1) items_.pop_front();
    }
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_all();
    return item;
  }

 private:
  size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
};

struct Line {
  long number;
  std::string text;
};

}  // namespace

std::string handle_record_line(const Design& design, const std::string& line, long line_no) {
  const auto start = std::chrono::steady_clock::now();
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    return error_line(line_no, std::string("malformed record: ") + e.what());
  }
  try {
    if (!j.is_object()) throw InvariantError("record must be an object");
    if (!j.contains("k") || !j["k"].is_number_integer()) throw InvariantError("'k' must be an integer");
    const Step k = j["k"].get<Step>();
    if (!j.contains("x_hat")) throw InvariantError("missing 'x_hat'");
    const Vector x_hat = numbers(j["x_hat"], "x_hat");
    const int n = design.model.n();
    const int p = design.model.p();
    ControllerState st = design.ctrl.initial_state();
    Vector integrator = Vector::Zero(p);
    if (j.contains("integrator")) {
      integrator = numbers(j["integrator"], "integrator");
    } else if (!design.ctrl.is_static()) {
      throw InvariantError("missing 'integrator'");
    }
    if (x_hat.size() != n || integrator.size() != p) {
      throw InvariantError("record arity mismatch: expected x_hat with n=" + std::to_string(n) +
                           " and integrator with p=" + std::to_string(p) + " values, got " +
                           std::to_string(x_hat.size()) + " and " + std::to_string(integrator.size()));
    }
    st.integrator = integrator;
    const SuspicionReport rep =
        suspicion_step(design.ews, design.model, design.ctrl, x_hat, st, k);
    OrderedJson out;
    out["k"] = k;
    if (rep.l_hat) {
      out["l_hat"] = *rep.l_hat;
    } else {
      out["l_hat"] = nullptr;
    }
    out["feas"] = rep.feas;
    out["prox"] = rep.prox;
    out["susp"] = rep.susp;
    out["warning"] = to_string(rep.warning);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    out["wall_time_us"] = std::chrono::duration<double, std::micro>(elapsed).count();
    return out.dump();
  } catch (const std::exception& e) {
    return error_line(line_no, e.what());
  }
}

int run_monitor(const Design& design, const LineSource& source, std::ostream& out,
                std::ostream& err, const MonitorOptions& opts) {
  BoundedQueue<Line> queue(opts.queue_capacity);
  std::optional<std::string> source_failure;
  std::thread reader([&] {
    long number = 0;
    try {
      std::string text;
      while (source(text)) {
        ++number;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;
        queue.push({number, std::move(text)});
        text.clear();
      }
    } catch (const std::exception& e) {
      source_failure = e.what();
    }
    queue.close();
  });

  while (auto line = queue.pop(opts.coalesce)) {
    out << handle_record_line(design, line->text, line->number) << '\n';
    out.flush();
  }
  reader.join();
  if (source_failure) {
    err << "monitor: source failed: " << *source_failure << '\n';
    return 5;
  }
  if (!out) {
    err << "monitor: output stream failed\n";
    return 5;
  }
  return 0;
}

int run_monitor_stdin(const Design& design, std::istream& in, std::ostream& out, std::ostream& err,
                      const MonitorOptions& opts) {
  LineSource source = [&in](std::string& line) {
    if (std::getline(in, line)) return true;
    if (in.bad()) throw SourceError("input stream read error");
    return false;
  };
  return run_monitor(design, source, out, err, opts);
}

int run_monitor_tcp(const Design& design, const std::string& host, unsigned short port,
                    std::ostream& out, std::ostream& err, const MonitorOptions& opts) {
  namespace asio = boost::asio;
  using asio::ip::tcp;
  asio::io_context io;
  tcp::socket socket(io);
  try {
    tcp::acceptor acceptor(io, tcp::endpoint(asio::ip::make_address(host), port));
    err << "monitor: listening on " << host << ':' << acceptor.local_endpoint().port() << '\n';
    acceptor.accept(socket);
  } catch (const std::exception& e) {
    err << "monitor: cannot accept on " << host << ':' << port << ": " << e.what() << '\n';
    return 5;
  }
  asio::streambuf buffer;
  LineSource source = [&](std::string& line) {
    boost::system::error_code ec;
    asio::read_until(socket, buffer, '\n', ec);
    if (ec == asio::error::eof) {
      if (buffer.size() == 0) return false;
      std::istream is(&buffer);
      std::getline(is, line);
      return true;
    }
    if (ec) throw SourceError(ec.message());
    std::istream is(&buffer);
    std::getline(is, line);
    return true;
  };
  return run_monitor(design, source, out, err, opts);
}

}  // namespace ews

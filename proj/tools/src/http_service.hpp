#pragma once

#include <memory>
#include <string>

#include "multisom/api.hpp"

namespace multisom {

/// Serves an Api over HTTP/1.1. Every route is forwarded to Api::handle, so the
/// HTTP payloads are byte-identical to the in-process ones.
class HttpService {
 public:
  explicit HttpService(std::shared_ptr<const Api> api);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);

  /// Accept loop; returns after stop(). Requires a prior bind().
  void listen();

  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace multisom

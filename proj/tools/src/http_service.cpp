#include "http_service.hpp"

#include <httplib.h>

#include "multisom/error.hpp"

namespace multisom {

struct HttpService::Impl {
  std::shared_ptr<const Api> api;
  httplib::Server server;
  bool bound = false;
};

namespace {

void forward(const Api& api, const httplib::Request& req, httplib::Response& res) {
  const ApiResponse r = api.handle({req.method, req.path, req.body});
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

HttpService::HttpService(std::shared_ptr<const Api> api) : impl_(std::make_unique<Impl>()) {
  if (!api) throw Error("http service needs an api");
  impl_->api = std::move(api);
  const Api& a = *impl_->api;
  auto handler = [&a](const httplib::Request& req, httplib::Response& res) { forward(a, req, res); };
  impl_->server.Get(R"(/.*)", handler);
  impl_->server.Post(R"(/.*)", handler);
  impl_->server.Put(R"(/.*)", handler);
  impl_->server.Delete(R"(/.*)", handler);
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  impl_->bound = true;
  return bound;
}

void HttpService::listen() {
  if (!impl_->bound) throw Error("listen() before bind()");
  impl_->server.listen_after_bind();
}

void HttpService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace multisom

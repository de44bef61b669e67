#include <httplib.h>

#include <thread>

#include "leadsheet/error.h"
#include "leadsheet/service/service.h"

namespace leadsheet::service {

struct HttpServer::Impl {
  const Service& service;
  httplib::Server server;
  std::thread thread;

  Impl(const Service& s, int threads) : service(s) {
    server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    auto reply = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    auto dispatch = [this, reply](const httplib::Request& req, httplib::Response& res) {
      std::map<std::string, std::string> query;
      for (const auto& [k, v] : req.params) query.emplace(k, v);
      reply(res, service.handle(req.method, req.path, req.body, query));
    };
    for (const char* path : {"/models", "/vocab", "/openapi.json"}) server.Get(path, dispatch);
    for (const char* path : {"/generate", "/template", "/valence", "/metrics"}) {
      server.Post(path, dispatch);
    }
    // Only fills in errors raised by httplib itself; handler bodies pass through.
    server.set_error_handler([reply](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      reply(res, error_response(res.status, "no route for " + req.method + " " + req.path));
      return httplib::Server::HandlerResponse::Handled;
    });
    server.set_exception_handler(
        [reply](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
          reply(res, error_response(500, "internal error"));
        });
  }
};

HttpServer::HttpServer(const Service& service, int threads)
    : impl_(std::make_unique<Impl>(service, threads)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error("cannot serve on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace leadsheet::service

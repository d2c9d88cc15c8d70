#pragma once

#include <map>
#include <memory>
#include <string>

#include "multisom/workspace.hpp"

namespace multisom {

// Read-only query interface over a workspace bundle. Transport-agnostic: the
// HTTP server and the command-line tool both route requests through Api, so
// their payloads are identical for identical inputs.
//
//   GET  /v1/health
//   GET  /v1/maps
//   GET  /v1/maps/{id}                  zoning, labels and member counts
//   GET  /v1/consistency                matrix, read row towards column
//   GET  /v1/consistency/{src}/{tgt}    per-source-node dispersion detail
//   POST /v1/propagate                  {"source", "target", "nodes" | "area", "theta"?, "modality"?}
//   POST /v1/chain                      {"theta"?, "steps": [{"source", "target", "nodes"? | "area"?}]}
//
// A chain step without "nodes" or "area" activates the focus of the previous step.

inline constexpr const char* kApiVersion = "v1";

struct ApiRequest {
  std::string method;  // "GET" or "POST"
  std::string path;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
  bool operator==(const ApiResponse&) const = default;
};

class Api {
 public:
  explicit Api(std::shared_ptr<const WorkspaceBundle> bundle);

  ApiResponse handle(const ApiRequest& request) const;

  const WorkspaceBundle& bundle() const noexcept { return *bundle_; }

 private:
  ApiResponse propagate(const std::string& body) const;
  ApiResponse chain(const std::string& body) const;
  ApiResponse consistency_detail(const std::string& source, const std::string& target) const;

  std::shared_ptr<const WorkspaceBundle> bundle_;
  std::string maps_payload_;
  std::string matrix_payload_;
  std::map<std::string, std::string> zoning_payloads_;
};

}  // namespace multisom

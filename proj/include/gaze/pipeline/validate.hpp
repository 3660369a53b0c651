#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace gaze::pipeline {

struct ValidationIssue {
  std::string file;  // relative to the session directory
  std::size_t line = 0;  // 1-based JSONL line or audit seq; 0 for whole-file problems
  std::string message;
};

/// Schema and integrity checks over every artifact present in a session directory.
std::vector<ValidationIssue> validate_artifacts(const std::filesystem::path& session_dir);

std::string format_issue(const ValidationIssue& issue);

}  // namespace gaze::pipeline

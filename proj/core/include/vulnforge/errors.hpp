#pragma once

#include <stdexcept>
#include <string>

namespace vulnforge {

// Every failure the library reports derives from Error. The kind string is
// stable and ends up in run logs, so tools can match on it without parsing
// the message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message);

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define VULNFORGE_DECLARE_ERROR(Name)                                   \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// ingest_cve / commit_miner
VULNFORGE_DECLARE_ERROR(NetworkUnavailable);
VULNFORGE_DECLARE_ERROR(MalformedResponse);
VULNFORGE_DECLARE_ERROR(CommitNotFound);
VULNFORGE_DECLARE_ERROR(OrphanCommit);

// cwe_catalog
VULNFORGE_DECLARE_ERROR(CatalogMissing);
VULNFORGE_DECLARE_ERROR(CatalogMalformed);
VULNFORGE_DECLARE_ERROR(InvalidCweId);

// function_extractor
VULNFORGE_DECLARE_ERROR(AlignmentAmbiguous);
VULNFORGE_DECLARE_ERROR(PatchMismatch);

// curator
VULNFORGE_DECLARE_ERROR(EmptyClass);
VULNFORGE_DECLARE_ERROR(InsufficientProjects);

// dataset_store
VULNFORGE_DECLARE_ERROR(SchemaMismatch);
VULNFORGE_DECLARE_ERROR(IntegrityFailure);
VULNFORGE_DECLARE_ERROR(UnknownAdapter);
VULNFORGE_DECLARE_ERROR(DatasetLocked);

// eval_kit
VULNFORGE_DECLARE_ERROR(UnknownSampleId);
VULNFORGE_DECLARE_ERROR(DuplicatePrediction);
VULNFORGE_DECLARE_ERROR(DegenerateVocabulary);
VULNFORGE_DECLARE_ERROR(InvalidPredictionFile);

// shared
VULNFORGE_DECLARE_ERROR(InvalidArgument);
VULNFORGE_DECLARE_ERROR(IoError);
VULNFORGE_DECLARE_ERROR(ConfigError);

#undef VULNFORGE_DECLARE_ERROR

}  // namespace vulnforge

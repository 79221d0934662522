#pragma once

// Homework lifecycle: a predefined template is instantiated for a child,
// tracked against its deadline, closed by exactly one activity report, and
// rolled up into a per-child progress summary.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "logomon/domain.hpp"
#include "logomon/json_codec.hpp"
#include "logomon/store.hpp"

namespace logomon::homework {

enum class AssignmentStatus { Pending, Overdue, ReportedOnTime, ReportedLate };

std::string_view to_string(AssignmentStatus status);

/// Exact non-negative fraction kept in lowest terms.
struct Rational {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  static Rational of(std::int64_t numerator, std::int64_t denominator);
  double to_double() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
  bool operator==(const Rational&) const = default;
};

struct ExerciseOutcome {
  EntityId exerciseId = 0;
  std::vector<HomeworkAttemptRecord> attempts;
  int successThresholdPercent = 0;
  int bestPercent = 0;
  bool resolved = false;

  bool operator==(const ExerciseOutcome&) const = default;
};

struct AssignmentProgress {
  EntityId assignmentId = 0;
  Date assignedDate{};
  Rational meanBestPercent;
  int resolvedCount = 0;
  int exerciseCount = 0;

  bool operator==(const AssignmentProgress&) const = default;
};

struct ProgressSummary {
  EntityId childId = 0;
  std::vector<AssignmentProgress> perAssignment;  // assignedDate ascending

  bool operator==(const ProgressSummary&) const = default;
};

/// One row of a returned activity report, before ids are allocated.
struct AttemptDraft {
  EntityId exerciseId = 0;
  int attemptIndex = 1;
  int achievedPercent = 0;
  int initiallyWrongWords = 0;

  bool operator==(const AttemptDraft&) const = default;
};

/// The report intake document: {assignmentId, reportDate, records:[...]}.
struct ReportIntake {
  EntityId assignmentId = 0;
  Date reportDate{};
  std::vector<AttemptDraft> records;

  bool operator==(const ReportIntake&) const = default;
};

json to_json(AssignmentStatus status);
json to_json(const Rational& r);
json to_json(const ExerciseOutcome& outcome);
json to_json(const std::vector<ExerciseOutcome>& outcomes);
json to_json(const ProgressSummary& summary);
json to_json(const AttemptDraft& draft);
json to_json(const ReportIntake& intake);
/// Strict; throws Error(ValidationFailed) on malformed input.
AttemptDraft attempt_draft_from_json(const json& j);
ReportIntake report_intake_from_json(const json& j);

// -- pure rules --------------------------------------------------------------

/// assignedDate + deadlineDays. A report on this day is still on time.
Date due_date(const HomeworkAssignment& assignment);
AssignmentStatus assignment_status(const HomeworkAssignment& assignment, const Date& today);

/// bestPercent = max over attempts (0 when none); resolved = bestPercent >= threshold.
ExerciseOutcome evaluate_exercise(EntityId exerciseId, std::vector<HomeworkAttemptRecord> attempts,
                                  int successThresholdPercent);

/// Attempt indices for one exercise must be exactly 1..k.
bool is_gapless_sequence(std::vector<int> attemptIndices);

// -- store-backed workflow ----------------------------------------------------

/// Throws NotFound (child or template) or ValidationFailed.
HomeworkAssignment assign_homework(Store& store, EntityId childId, EntityId templateId,
                                   const Date& assignedDate, int deadlineDays);

/// Persists the whole report in one transaction and stamps reportDate.
/// Throws NotFound, AlreadyReported, UnknownExercise, BadAttemptSequence or
/// ValidationFailed; on any error nothing is written.
std::vector<ExerciseOutcome> ingest_report(Store& store, const ReportIntake& intake);

/// Outcomes for every exercise of the assignment's template, in template order.
std::vector<ExerciseOutcome> assignment_outcomes(const Store& store, EntityId assignmentId);

/// Derived attempt count (max attemptIndex) for one exercise of an assignment.
int attempt_count(const Store& store, EntityId assignmentId, EntityId exerciseId);
/// Checks an explicit attempt count from a legacy import against the
/// derived value. Throws ValidationFailed on disagreement.
void check_attempt_count(const Store& store, EntityId assignmentId, EntityId exerciseId,
                         int declaredCount);

/// One entry per reported assignment of the child, oldest first.
ProgressSummary child_progress(const Store& store, EntityId childId);

}  // namespace logomon::homework

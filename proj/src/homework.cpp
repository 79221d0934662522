#include "logomon/homework.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace logomon::homework {

std::string_view to_string(AssignmentStatus status) {
  switch (status) {
    case AssignmentStatus::Pending: return "Pending";
    case AssignmentStatus::Overdue: return "Overdue";
    case AssignmentStatus::ReportedOnTime: return "ReportedOnTime";
    case AssignmentStatus::ReportedLate: return "ReportedLate";
  }
  return "Pending";
}

Rational Rational::of(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) throw std::invalid_argument("zero denominator");
  if (denominator < 0) numerator = -numerator, denominator = -denominator;
  const auto g = std::gcd(numerator < 0 ? -numerator : numerator, denominator);
  return g ? Rational{numerator / g, denominator / g} : Rational{0, 1};
}

// ---------------------------------------------------------------------------
// JSON

json to_json(AssignmentStatus status) { return std::string(to_string(status)); }

json to_json(const Rational& r) {
  return {{"numerator", r.numerator}, {"denominator", r.denominator}, {"value", r.to_double()}};
}

json to_json(const ExerciseOutcome& outcome) {
  json attempts = json::array();
  for (const auto& a : outcome.attempts) attempts.push_back(logomon::to_json(Entity{a}));
  return {{"exerciseId", outcome.exerciseId},
          {"attempts", attempts},
          {"attemptCount", static_cast<int>(outcome.attempts.size())},
          {"successThresholdPercent", outcome.successThresholdPercent},
          {"bestPercent", outcome.bestPercent},
          {"resolved", outcome.resolved}};
}

json to_json(const std::vector<ExerciseOutcome>& outcomes) {
  json arr = json::array();
  for (const auto& o : outcomes) arr.push_back(to_json(o));
  return arr;
}

json to_json(const ProgressSummary& summary) {
  json entries = json::array();
  for (const auto& p : summary.perAssignment)
    entries.push_back({{"assignmentId", p.assignmentId},
                       {"assignedDate", format_date(p.assignedDate)},
                       {"meanBestPercent", to_json(p.meanBestPercent)},
                       {"resolvedCount", p.resolvedCount},
                       {"exerciseCount", p.exerciseCount}});
  return {{"childId", summary.childId}, {"perAssignment", entries}};
}

json to_json(const AttemptDraft& d) {
  return {{"exerciseId", d.exerciseId},
          {"attemptIndex", d.attemptIndex},
          {"achievedPercent", d.achievedPercent},
          {"initiallyWrongWords", d.initiallyWrongWords}};
}

json to_json(const ReportIntake& intake) {
  json records = json::array();
  for (const auto& r : intake.records) records.push_back(to_json(r));
  return {{"assignmentId", intake.assignmentId},
          {"reportDate", format_date(intake.reportDate)},
          {"records", records}};
}

AttemptDraft attempt_draft_from_json(const json& j) {
  StrictObject o(j, "record");
  AttemptDraft d;
  d.exerciseId = o.integer("exerciseId");
  d.attemptIndex = o.int32("attemptIndex");
  d.achievedPercent = o.int32("achievedPercent");
  d.initiallyWrongWords = o.int32("initiallyWrongWords");
  o.finish();
  return d;
}

ReportIntake report_intake_from_json(const json& j) {
  StrictObject o(j, "report");
  ReportIntake intake;
  intake.assignmentId = o.integer("assignmentId");
  intake.reportDate = o.date("reportDate");
  for (const auto& r : o.array("records")) intake.records.push_back(attempt_draft_from_json(r));
  o.finish();
  return intake;
}

// ---------------------------------------------------------------------------
// Pure rules

Date due_date(const HomeworkAssignment& assignment) {
  return add_days(assignment.assignedDate, assignment.deadlineDays);
}

AssignmentStatus assignment_status(const HomeworkAssignment& assignment, const Date& today) {
  const auto due = std::chrono::sys_days{due_date(assignment)};
  if (assignment.reportDate)
    return std::chrono::sys_days{*assignment.reportDate} <= due ? AssignmentStatus::ReportedOnTime
                                                                : AssignmentStatus::ReportedLate;
  return std::chrono::sys_days{today} <= due ? AssignmentStatus::Pending : AssignmentStatus::Overdue;
}

ExerciseOutcome evaluate_exercise(EntityId exerciseId, std::vector<HomeworkAttemptRecord> attempts,
                                  int successThresholdPercent) {
  std::sort(attempts.begin(), attempts.end(),
            [](const auto& a, const auto& b) { return a.attemptIndex < b.attemptIndex; });
  ExerciseOutcome outcome;
  outcome.exerciseId = exerciseId;
  outcome.successThresholdPercent = successThresholdPercent;
  for (const auto& a : attempts) outcome.bestPercent = std::max(outcome.bestPercent, a.achievedPercent);
  outcome.resolved = outcome.bestPercent >= successThresholdPercent;
  outcome.attempts = std::move(attempts);
  return outcome;
}

bool is_gapless_sequence(std::vector<int> attemptIndices) {
  std::sort(attemptIndices.begin(), attemptIndices.end());
  for (std::size_t i = 0; i < attemptIndices.size(); ++i)
    if (attemptIndices[i] != static_cast<int>(i) + 1) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Workflow

HomeworkAssignment assign_homework(Store& store, EntityId childId, EntityId templateId,
                                   const Date& assignedDate, int deadlineDays) {
  HomeworkAssignment assignment;
  assignment.childId = childId;
  assignment.predefinedHomeworkId = templateId;
  assignment.assignedDate = assignedDate;
  assignment.deadlineDays = deadlineDays;
  validate_assignment(assignment).throw_if_failed("HomeworkAssignment");
  return store.atomically([&] {
    if (!store.exists(EntityKind::Child, childId))
      throw Error(ErrorCode::NotFound, "Child:" + std::to_string(childId) + " not found");
    if (!store.exists(EntityKind::PredefinedHomework, templateId))
      throw Error(ErrorCode::NotFound,
                  "PredefinedHomework:" + std::to_string(templateId) + " not found");
    assignment.id = store.put(assignment);
    return assignment;
  });
}

std::vector<ExerciseOutcome> ingest_report(Store& store, const ReportIntake& intake) {
  return store.atomically([&] {
    auto found = store.find(EntityKind::HomeworkAssignment, intake.assignmentId);
    if (!found)
      throw Error(ErrorCode::NotFound,
                  "HomeworkAssignment:" + std::to_string(intake.assignmentId) + " not found");
    auto assignment = std::get<HomeworkAssignment>(std::move(*found));
    if (assignment.reportDate)
      throw Error(ErrorCode::AlreadyReported,
                  "assignment " + std::to_string(assignment.id) + " was already reported on " +
                      format_date(*assignment.reportDate));

    const auto tmpl = store.get<PredefinedHomework>(assignment.predefinedHomeworkId);
    std::map<EntityId, std::vector<int>> indices;
    for (const auto& item : tmpl.exerciseItems) indices[item.exerciseId];

    std::map<EntityId, int> wordCounts;
    for (const auto& draft : intake.records) {
      if (!indices.contains(draft.exerciseId))
        throw Error(ErrorCode::UnknownExercise,
                    "exercise " + std::to_string(draft.exerciseId) +
                        " is not part of the assigned template");
      auto [it, fresh] = wordCounts.try_emplace(draft.exerciseId, 0);
      if (fresh) it->second = static_cast<int>(store.configurations_of(draft.exerciseId).size());
      const HomeworkAttemptRecord record{0, assignment.id, draft.exerciseId, draft.attemptIndex,
                                         draft.achievedPercent, draft.initiallyWrongWords};
      validate_attempt_record(record, it->second).throw_if_failed("HomeworkAttemptRecord");
      indices[draft.exerciseId].push_back(draft.attemptIndex);
    }
    for (const auto& [exerciseId, seq] : indices)
      if (!is_gapless_sequence(seq))
        throw Error(ErrorCode::BadAttemptSequence,
                    "attempt indices for exercise " + std::to_string(exerciseId) +
                        " must run 1..k without gaps or repeats");

    assignment.reportDate = intake.reportDate;
    validate_assignment(assignment).throw_if_failed("report");

    for (const auto& draft : intake.records)
      store.put(HomeworkAttemptRecord{0, assignment.id, draft.exerciseId, draft.attemptIndex,
                                      draft.achievedPercent, draft.initiallyWrongWords});
    store.put(assignment);
    return assignment_outcomes(store, assignment.id);
  });
}

std::vector<ExerciseOutcome> assignment_outcomes(const Store& store, EntityId assignmentId) {
  const auto assignment = store.get<HomeworkAssignment>(assignmentId);
  const auto tmpl = store.get<PredefinedHomework>(assignment.predefinedHomeworkId);
  std::map<EntityId, std::vector<HomeworkAttemptRecord>> byExercise;
  for (auto& record : store.attempts_of(assignmentId))
    byExercise[record.exerciseId].push_back(std::move(record));
  std::vector<ExerciseOutcome> outcomes;
  for (const auto& item : tmpl.exerciseItems)
    outcomes.push_back(evaluate_exercise(item.exerciseId, std::move(byExercise[item.exerciseId]),
                                         item.successThresholdPercent));
  return outcomes;
}

int attempt_count(const Store& store, EntityId assignmentId, EntityId exerciseId) {
  int count = 0;
  for (const auto& r : store.attempts_of(assignmentId))
    if (r.exerciseId == exerciseId) count = std::max(count, r.attemptIndex);
  return count;
}

void check_attempt_count(const Store& store, EntityId assignmentId, EntityId exerciseId,
                         int declaredCount) {
  const int derived = attempt_count(store, assignmentId, exerciseId);
  if (derived == declaredCount) return;
  ValidationResult r;
  r.add("attemptCount", "attempt-count-mismatch",
        "declared " + std::to_string(declaredCount) + " attempts but " + std::to_string(derived) +
            " are recorded");
  r.throw_if_failed("attempt count");
}

ProgressSummary child_progress(const Store& store, EntityId childId) {
  if (!store.exists(EntityKind::Child, childId))
    throw Error(ErrorCode::NotFound, "Child:" + std::to_string(childId) + " not found");
  ProgressSummary summary;
  summary.childId = childId;
  for (const auto& assignment : store.assignments_of_child(childId)) {
    if (!assignment.reportDate) continue;
    const auto outcomes = assignment_outcomes(store, assignment.id);
    AssignmentProgress entry;
    entry.assignmentId = assignment.id;
    entry.assignedDate = assignment.assignedDate;
    entry.exerciseCount = static_cast<int>(outcomes.size());
    std::int64_t total = 0;
    for (const auto& o : outcomes) {
      total += o.bestPercent;
      entry.resolvedCount += o.resolved ? 1 : 0;
    }
    entry.meanBestPercent =
        outcomes.empty() ? Rational{} : Rational::of(total, static_cast<std::int64_t>(outcomes.size()));
    summary.perAssignment.push_back(entry);
  }
  return summary;
}

}  // namespace logomon::homework

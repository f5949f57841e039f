//! Reference pack with one challenge per type, themed on C string handling
//! and input validation. Shipped as `packs/sample.json`.

use crate::model::*;

fn s(text: &str) -> String {
    text.to_string()
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|t| t.to_string()).collect()
}

fn cert(id: &str, title: &str) -> GuidelineRef {
    GuidelineRef::new(GuidelineSource::Cert, id, title)
}

fn msc24() -> GuidelineRef {
    cert("MSC24-C", "Do not use deprecated or obsolescent functions")
}

fn str31() -> GuidelineRef {
    cert(
        "STR31-C",
        "Guarantee that storage for strings has sufficient space for character data and the null terminator",
    )
}

fn fio30() -> GuidelineRef {
    cert("FIO30-C", "Exclude user input from format strings")
}

fn int30() -> GuidelineRef {
    cert("INT30-C", "Ensure that unsigned integer operations do not wrap")
}

fn a03() -> GuidelineRef {
    GuidelineRef::new(GuidelineSource::Owasp, "A03:2021", "Injection")
}

fn hint(id: &str, kind: HintKind, text: &str, cost: u32, unlock: UnlockRule) -> HintSpec {
    HintSpec {
        hint_id: s(id),
        kind,
        text: s(text),
        url: None,
        unlock,
        cost,
    }
}

fn after_failures(n: u32) -> UnlockRule {
    UnlockRule {
        after_seconds: None,
        after_failed_attempts: Some(n),
    }
}

fn after_seconds_or_failures(secs: u64, n: u32) -> UnlockRule {
    UnlockRule {
        after_seconds: Some(secs),
        after_failed_attempts: Some(n),
    }
}

fn wiki(id: &str) -> String {
    format!("https://wiki.sei.cmu.edu/confluence/display/c/{id}")
}

fn scq_challenge() -> Challenge {
    Challenge {
        id: s("scq-unbounded-read"),
        title: s("The function that cannot be tamed"),
        base_points: 100,
        intro: Some(IntroStage {
            text: s("Some C library functions read input without any way to say how large the destination is. \
                     They were removed from the language standard because no caller can use them safely."),
            quiz: Some(ChallengeBody::Scq {
                guiding_question: s("Where does a local array declared inside a C function usually live?"),
                options: strings(&["On the stack", "In the heap", "In read-only memory"]),
                correct_index: 0,
            }),
            gating: false,
        }),
        body: ChallengeBody::Scq {
            guiding_question: s("Which standard C function reads a line of input with no way to limit how many characters it stores?"),
            options: strings(&["gets", "fgets", "getline", "scanf with a field width such as %63s"]),
            correct_index: 0,
        },
        hints: vec![
            hint(
                "scq-concept",
                HintKind::ConceptDisclosure,
                "Look for the only candidate whose parameter list has no size argument and no way to grow the buffer.",
                10,
                after_failures(1),
            ),
            HintSpec {
                url: Some(wiki("MSC24-C")),
                ..hint(
                    "scq-reference",
                    HintKind::ExternalReference,
                    "The CERT rule on deprecated and obsolescent functions lists it.",
                    5,
                    after_seconds_or_failures(90, 2),
                )
            },
        ],
        wrong_branch: WrongBranchPolicy::ExplainThenReturn {
            explanation: s("That function is bounded: it takes the destination size or allocates as needed. \
                            Look for the one that has no size parameter at all."),
            max_attempts: Some(3),
        },
        correct_branch: CorrectBranchPolicy::ConcludeThenFinish {
            additional_question: Some(ChallengeBody::Scq {
                guiding_question: s("What should replace an unbounded line read in new code?"),
                options: strings(&[
                    "fgets with sizeof the destination",
                    "A larger destination array",
                    "Reading one character less",
                ]),
                correct_index: 0,
            }),
        },
        conclusion: ConclusionStage {
            explanation: s("gets() writes as many characters as the input provides, so any input longer than the \
                            destination overwrites adjacent memory. It was removed in C11; CERT MSC24-C forbids it. \
                            Use fgets() with the destination size, or getline() which allocates."),
            references: vec![wiki("MSC24-C")],
        },
        score_policy: ScorePolicy::default(),
        guideline: msc24(),
    }
}

fn mcq_challenge() -> Challenge {
    Challenge {
        id: s("mcq-unbounded-copies"),
        title: s("Copies that do not know the size"),
        base_points: 150,
        intro: Some(IntroStage {
            text: s("A string copy is only safe when something stops it at the end of the destination. \
                     Several classic library calls have no such stop."),
            quiz: None,
            gating: false,
        }),
        body: ChallengeBody::Mcq {
            guiding_question: s("Which of these calls can write past the end of dst when src is longer than expected? Select all that apply."),
            options: strings(&[
                "strcpy(dst, src);",
                "strcat(dst, src);",
                "sprintf(dst, \"%s\", src);",
                "snprintf(dst, sizeof(dst), \"%s\", src);",
                "strnlen(src, sizeof(dst));",
            ]),
            correct_indices: [0, 1, 2].into(),
        },
        hints: vec![hint(
            "mcq-detail",
            HintKind::AnswerDetail,
            "Only calls that receive the destination size can stop at the end of dst. There is more than one unsafe call.",
            15,
            after_failures(1),
        )],
        wrong_branch: WrongBranchPolicy::ReturnToChallenge { max_attempts: Some(3) },
        correct_branch: CorrectBranchPolicy::Finish,
        conclusion: ConclusionStage {
            explanation: s("strcpy, strcat and sprintf copy until the source ends, whatever the destination size. \
                            CERT STR31-C requires that the destination always has room for the data and the null \
                            terminator; bounded calls such as snprintf enforce it."),
            references: vec![wiki("STR31-C")],
        },
        score_policy: ScorePolicy {
            penalize_hints: true,
            penalize_retries: true,
            retry_penalty: 10,
            min_score: 30,
        },
        guideline: str31(),
    }
}

fn teq_challenge() -> Challenge {
    Challenge {
        id: s("teq-name-the-weakness"),
        title: s("Name the weakness"),
        base_points: 120,
        intro: Some(IntroStage {
            text: s("Fixed-size arrays on the stack sit right next to saved registers and the return address. \
                     Writing beyond their end is one of the oldest routes to code execution."),
            quiz: Some(ChallengeBody::Mcq {
                guiding_question: s("Which of these can be stored next to a local array on the stack?"),
                options: strings(&["The saved return address", "Other local variables", "The program's source code"]),
                correct_indices: [0, 1].into(),
            }),
            gating: false,
        }),
        body: ChallengeBody::Teq {
            guiding_question: s("A function copies an attacker-controlled string into char name[16] using strcpy. \
                                 Name the class of weakness this creates (two words)."),
            accepted_answers: strings(&[
                "buffer overflow",
                "buffer overrun",
                "stack buffer overflow",
                "stack-based buffer overflow",
            ]),
            normalization: NormalizationSpec::default(),
        },
        hints: vec![
            hint(
                "teq-concept",
                HintKind::ConceptDisclosure,
                "The copy writes more bytes than the array can hold and spills into neighbouring memory.",
                10,
                UnlockRule {
                    after_seconds: Some(30),
                    after_failed_attempts: None,
                },
            ),
            HintSpec {
                url: Some(s("https://cwe.mitre.org/data/definitions/121.html")),
                ..hint(
                    "teq-reference",
                    HintKind::ExternalReference,
                    "CWE-121 describes this weakness for stack memory.",
                    10,
                    UnlockRule {
                        after_seconds: Some(120),
                        after_failed_attempts: None,
                    },
                )
            },
        ],
        wrong_branch: WrongBranchPolicy::ExplainThenFinish {
            explanation: s("Copying more bytes than the array holds writes past its end and corrupts adjacent stack \
                            memory, including the saved return address. The two-word name combines the memory region \
                            with what the data does when it no longer fits."),
        },
        correct_branch: CorrectBranchPolicy::ConcludeThenFinish { additional_question: None },
        conclusion: ConclusionStage {
            explanation: s("Out-of-bounds writes on the stack let an attacker replace the return address. CERT STR31-C \
                            asks for destination storage that always fits the data plus the terminator."),
            references: vec![wiki("STR31-C"), s("https://cwe.mitre.org/data/definitions/121.html")],
        },
        score_policy: ScorePolicy::default(),
        guideline: str31(),
    }
}

const CSC_CODE: &str = "#include <stdio.h>

void log_user(const char *name) {
    char line[64];
    snprintf(line, sizeof(line), \"user=%s\", name);
    printf(line);
    putchar('\\n');
}
";

fn csc_challenge() -> Challenge {
    Challenge {
        id: s("csc-format-string"),
        title: s("Which guideline does this logger break?"),
        base_points: 150,
        intro: Some(IntroStage {
            text: s("Logging code handles user data all the time, and small shortcuts there become vulnerabilities."),
            quiz: None,
            gating: false,
        }),
        body: ChallengeBody::Csc {
            guiding_question: s("This logging helper violates one of these guidelines: CERT FIO30-C (exclude user \
                                 input from format strings), CERT STR31-C (sufficient storage for strings) or CERT \
                                 INT30-C (unsigned operations must not wrap). Select the line that violates it."),
            code: s(CSC_CODE),
            selectable_units: vec![
                CodeUnit::Line(4),
                CodeUnit::Line(5),
                CodeUnit::Line(6),
                CodeUnit::Line(7),
                CodeUnit::Expr {
                    line: 5,
                    start: 19,
                    end: 31,
                },
            ],
            correct_units: [CodeUnit::Line(6)].into(),
            prompt_mode: PromptMode::FindViolatedGuideline,
            guideline: Some(fio30()),
        },
        hints: vec![
            hint(
                "csc-concept",
                HintKind::ConceptDisclosure,
                "The snprintf call is bounded correctly. Ask what happens when name contains a percent sign.",
                15,
                after_failures(1),
            ),
            hint(
                "csc-detail",
                HintKind::AnswerDetail,
                "A function that interprets %-directives must never get user data as its first argument.",
                20,
                after_failures(2),
            ),
        ],
        wrong_branch: WrongBranchPolicy::ExplainThenReturn {
            explanation: s("That line is fine. The bounded snprintf already keeps the data inside line[]; look at how \
                            the assembled text is printed."),
            max_attempts: Some(4),
        },
        correct_branch: CorrectBranchPolicy::ConcludeThenFinish {
            additional_question: Some(ChallengeBody::Scq {
                guiding_question: s("Which guideline does the selected line violate?"),
                options: strings(&["CERT FIO30-C", "CERT STR31-C", "CERT INT30-C"]),
                correct_index: 0,
            }),
        },
        conclusion: ConclusionStage {
            explanation: s("printf(line) lets %n and %x sequences in the user name read and write memory. CERT FIO30-C: \
                            pass user data only as an argument, as in printf(\"%s\", line) or fputs(line, stdout)."),
            references: vec![wiki("FIO30-C")],
        },
        score_policy: ScorePolicy::default(),
        guideline: fio30(),
    }
}

const CEC_STARTER: &str = "#include <string.h>

void set_name(char *dst, size_t dst_size, const char *src) {
    strcpy(dst, src);
}
";

const CEC_GOOD_SNPRINTF: &str = "#include <stdio.h>

void set_name(char *dst, size_t dst_size, const char *src) {
    snprintf(dst, dst_size, \"%s\", src);
}
";

const CEC_GOOD_STRNCPY: &str = "#include <string.h>

void set_name(char *dst, size_t dst_size, const char *src) {
    if (dst_size == 0) return;
    strncpy(dst, src, dst_size - 1);
    dst[dst_size - 1] = '\\0';
}
";

const CEC_BAD_STRLEN: &str = "#include <string.h>

void set_name(char *dst, size_t dst_size, const char *src) {
    strncpy(dst, src, strlen(src));
}
";

fn cec_challenge() -> Challenge {
    let rule = |rule_id: &str, kind: RuleKind, pattern: &str, limit: Option<u32>, feedback: &str| CodeRule {
        rule_id: s(rule_id),
        kind,
        pattern: s(pattern),
        limit,
        feedback: s(feedback),
        guideline: str31(),
    };
    Challenge {
        id: s("cec-bounded-copy"),
        title: s("Fix the name copy"),
        base_points: 200,
        intro: Some(IntroStage {
            text: s("The caller tells set_name how large dst is. The current implementation ignores that and \
                     copies the whole source string."),
            quiz: Some(ChallengeBody::Scq {
                guiding_question: s("What does strcpy use to decide when to stop copying?"),
                options: strings(&["The null terminator of the source", "The size of the destination", "A fixed limit of 256 bytes"]),
                correct_index: 0,
            }),
            gating: true,
        }),
        body: ChallengeBody::Cec {
            guiding_question: s("Rewrite set_name so it can never write more than dst_size bytes into dst, \
                                 and dst is always null-terminated."),
            starter_code: s(CEC_STARTER),
            rule_set: vec![
                rule(
                    "no-strcpy",
                    RuleKind::ForbiddenPattern,
                    "strcpy(",
                    None,
                    "strcpy copies until the source terminator and ignores dst_size. Use a bounded copy.",
                ),
                rule(
                    "no-strcat",
                    RuleKind::ForbiddenPattern,
                    "strcat(",
                    None,
                    "strcat appends without a bound. Build the string with a bounded call instead.",
                ),
                rule(
                    "pass-dst-size",
                    RuleKind::RequiredPattern,
                    ", dst_size",
                    None,
                    "The copy has to be limited by dst_size. Pass dst_size (or dst_size - 1) to the copying call.",
                ),
                rule(
                    "single-copy",
                    RuleKind::MaxOccurrences,
                    "memcpy(",
                    Some(1),
                    "Copy the string with one bounded call; several memcpy calls are hard to verify.",
                ),
            ],
            fixtures: CecFixtures {
                known_good: strings(&[CEC_GOOD_SNPRINTF, CEC_GOOD_STRNCPY]),
                known_bad: strings(&[CEC_STARTER, CEC_BAD_STRLEN]),
            },
        },
        hints: vec![
            hint(
                "cec-concept",
                HintKind::ConceptDisclosure,
                "Every call that writes into dst must be told how large dst is.",
                20,
                after_failures(1),
            ),
            HintSpec {
                url: Some(wiki("STR31-C")),
                ..hint(
                    "cec-reference",
                    HintKind::ExternalReference,
                    "",
                    10,
                    after_seconds_or_failures(120, 2),
                )
            },
            hint(
                "cec-detail",
                HintKind::AnswerDetail,
                "snprintf with the destination size as its second argument always terminates the output.",
                30,
                after_failures(3),
            ),
        ],
        wrong_branch: WrongBranchPolicy::ReturnToChallenge { max_attempts: None },
        correct_branch: CorrectBranchPolicy::ConcludeThenFinish { additional_question: None },
        conclusion: ConclusionStage {
            explanation: s("A copy is safe only when it is limited by the destination size and leaves room for the \
                            terminator (CERT STR31-C). snprintf does both; strncpy needs an explicit terminator."),
            references: vec![wiki("STR31-C")],
        },
        score_policy: ScorePolicy::default(),
        guideline: str31(),
    }
}

fn alr_challenge() -> Challenge {
    Challenge {
        id: s("alr-guideline-match"),
        title: s("Match guidelines to vulnerabilities"),
        base_points: 100,
        intro: Some(IntroStage {
            text: s("Secure coding guidelines exist because specific mistakes keep causing specific vulnerabilities."),
            quiz: None,
            gating: false,
        }),
        body: ChallengeBody::Alr {
            guiding_question: s("Associate each guideline on the left with the vulnerability it prevents on the right."),
            left: strings(&[
                "CERT STR31-C: sufficient storage for strings",
                "CERT FIO30-C: exclude user input from format strings",
                "CERT INT30-C: unsigned operations must not wrap",
                "OWASP A03:2021: injection",
            ]),
            right: strings(&[
                "strcpy of a long name into a 16-byte array",
                "printf(user_input) leaking stack contents",
                "malloc(count * size) allocating a tiny block",
                "SQL query assembled by string concatenation",
            ]),
            answer_map: (0..4).map(|i| (i, i)).collect(),
            cardinality: Cardinality::Bijective,
        },
        hints: vec![hint(
            "alr-concept",
            HintKind::ConceptDisclosure,
            "Read each guideline title as the fix; the matching vulnerability is what happens without it.",
            10,
            UnlockRule::default(),
        )],
        wrong_branch: WrongBranchPolicy::ProceedToFinish,
        correct_branch: CorrectBranchPolicy::Finish,
        conclusion: ConclusionStage {
            explanation: s("Each guideline targets one mistake: unbounded string storage, user-controlled format \
                            strings, wrapping size arithmetic and unparameterized queries."),
            references: vec![
                wiki("STR31-C"),
                wiki("FIO30-C"),
                wiki("INT30-C"),
                s("https://owasp.org/Top10/A03_2021-Injection/"),
            ],
        },
        score_policy: ScorePolicy::default(),
        guideline: a03(),
    }
}

pub fn build_sample_pack() -> ChallengePack {
    ChallengePack {
        pack_id: s("sample-c-strings"),
        title: s("Secure C string handling"),
        version: s("1.0.0"),
        challenges: vec![
            scq_challenge(),
            mcq_challenge(),
            teq_challenge(),
            csc_challenge(),
            cec_challenge(),
            alr_challenge(),
        ],
        scg_catalog: vec![msc24(), str31(), fio30(), int30(), a03()],
    }
}

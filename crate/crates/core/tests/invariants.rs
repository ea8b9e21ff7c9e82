use coachd_core::log::parse_events;
use coachd_core::{
    CoachingSnippet, Direction, EventPayload, EventRecord, Ledger, MicroAssessment, ReputationParams, Selector, ShownSet,
    State, TaskType, Worker,
};
use proptest::prelude::*;

const TYPES: [TaskType; 2] = [TaskType::Survey, TaskType::Writing];

#[derive(Debug, Clone)]
struct Plan {
    tasks: Vec<u64>,
    snippets: Vec<(usize, usize, i64)>,
    votes: Vec<(usize, usize, bool)>,
}

fn plan() -> impl Strategy<Value = Plan> {
    (2usize..10).prop_flat_map(|workers| {
        (
            prop::collection::vec(0u64..20_000, workers),
            prop::collection::vec((0..workers, 0..TYPES.len(), 0i64..4), 1..20),
            prop::collection::vec((0..workers, 0usize..20, any::<bool>()), 0..150),
        )
            .prop_map(|(tasks, snippets, votes)| Plan { tasks, snippets, votes })
    })
}

fn build(plan: &Plan) -> Ledger {
    let mut ledger = Ledger::new();
    for (w, &tasks_completed) in plan.tasks.iter().enumerate() {
        ledger.add_worker(Worker { worker_id: format!("w{w}"), tasks_completed, registered_at: 0 }).unwrap();
    }
    for (s, &(author, t, created_at)) in plan.snippets.iter().enumerate() {
        ledger
            .add_snippet(CoachingSnippet {
                snippet_id: format!("s{s:02}"),
                author_id: format!("w{author}"),
                task_type: TYPES[t],
                text: format!("tip {s}"),
                created_at,
            })
            .unwrap();
    }
    for (a, &(voter, snippet, up)) in plan.votes.iter().enumerate() {
        let assessment = MicroAssessment {
            assessment_id: format!("a{a}"),
            voter_id: format!("w{voter}"),
            snippet_id: format!("s{:02}", snippet % plan.snippets.len()),
            direction: if up { Direction::Up } else { Direction::Down },
            cast_at: a as i64,
        };
        if ledger.check_assessment(&assessment).is_ok() {
            ledger.add_assessment(assessment).unwrap();
        }
    }
    ledger
}

fn ids(selector: &Selector, t: TaskType) -> Vec<String> {
    selector.rank(t).into_iter().map(|s| s.snippet_id).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rank_order_ignores_credit_scale(plan in plan(), exp in -4.0f64..4.0) {
        let ledger = build(&plan);
        let base = ReputationParams::default();
        let scaled = ReputationParams { credit_per_reputation: 10f64.powf(exp), ..base.clone() };
        let (a, b) = (Selector::new(&ledger, &base), Selector::new(&ledger, &scaled));
        for t in TYPES {
            prop_assert_eq!(ids(&a, t), ids(&b, t));
        }
    }

    #[test]
    fn pages_respect_shown_set_and_authorship(plan in plan(), reader in 0usize..10, pages in 1u32..5) {
        let ledger = build(&plan);
        let reader = format!("w{}", reader % plan.tasks.len());
        let selector = Selector::new(&ledger, &ReputationParams::default());
        let mut shown = ShownSet::new(reader.clone());
        for t in TYPES {
            for p in 0..pages {
                let before = shown.clone();
                let page = selector.build_display_page(&reader, t, p, &mut shown).unwrap();
                prop_assert!(page.slots.len() <= 4);
                for (i, id) in page.slots.iter().enumerate() {
                    let snippet = ledger.snippet(id).unwrap();
                    prop_assert!(snippet.author_id != reader);
                    prop_assert_eq!(snippet.task_type, t);
                    prop_assert!(!before.contains(id));
                    prop_assert!(!page.slots[..i].contains(id));
                }
                if let Some(e) = page.exploration_slot {
                    prop_assert_eq!(e, page.slots.len() - 1);
                }
            }
        }
    }

    #[test]
    fn replay_matches_incremental_state(plan in plan()) {
        let mut state = State::new();
        let mut events = Vec::new();
        let mut hashes = vec![state.snapshot_hash()];
        let mut push = |state: &mut State, payload| {
            let event = EventRecord { event_id: state.next_event_id(), at: events.len() as i64, payload };
            if state.apply(&event).is_ok() {
                events.push(event);
                hashes.push(state.snapshot_hash());
            }
        };
        for (w, &tasks_completed) in plan.tasks.iter().enumerate() {
            push(&mut state, EventPayload::WorkerRegistered { worker_id: format!("w{w}"), tasks_completed });
        }
        for (s, &(author, t, _)) in plan.snippets.iter().enumerate() {
            let snippet_id = state.next_snippet_id();
            push(&mut state, EventPayload::SnippetCreated {
                snippet_id,
                author_id: format!("w{author}"),
                task_type: TYPES[t],
                text: format!("tip {s}"),
            });
        }
        for &(voter, snippet, up) in &plan.votes {
            let assessment_id = state.next_assessment_id();
            push(&mut state, EventPayload::VoteCast {
                assessment_id,
                voter_id: format!("w{voter}"),
                snippet_id: format!("s{:06}", snippet % plan.snippets.len() + 1),
                direction: if up { Direction::Up } else { Direction::Down },
            });
            if up {
                let worker_id = format!("w{voter}");
                let page = Selector::new(state.ledger(), &ReputationParams::default())
                    .compose_page(&worker_id, TaskType::Survey, 0, &state.shown(&worker_id))
                    .unwrap();
                push(&mut state, EventPayload::DisplayServed {
                    worker_id,
                    task_type: TaskType::Survey,
                    page_index: 0,
                    snippet_ids: page.slots,
                    session_start: false,
                });
            }
        }
        let text: String = events.iter().map(|e| e.to_canonical_json() + "\n").collect();
        let parsed = parse_events(text.as_bytes()).unwrap();
        prop_assert_eq!(&parsed.events, &events);
        for (k, hash) in hashes.iter().enumerate() {
            prop_assert_eq!(&State::replay(&events[..k]).unwrap().snapshot_hash(), hash);
        }
    }
}

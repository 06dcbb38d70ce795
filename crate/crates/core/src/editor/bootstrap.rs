use super::EditorBackend;
use crate::command::{ApplyResult, Command};

/// The mindmap metamodel as commands: `Class` at the top, the mindmap types
/// as its instances, and composition declarations with multiplicities.
pub fn metamodel_commands() -> Vec<Command> {
    [
        "CREATE -name Class -typedBy Clabject",
        "CREATE -name MindMap -typedBy Class -title String",
        "CREATE -name Topic -typedBy Class -potency 0",
        "CREATE -name CentralTopic -typedBy Class",
        "CREATE -name MainTopic -typedBy Class",
        "CREATE -name SubTopic -typedBy Class",
        "CREATE -name Marker -typedBy Class -symbol String -potency 1",
        "LINK -from MindMap.topic -to CentralTopic -kind Composition -lower 1 -upper 1",
        "LINK -from CentralTopic.mainTopics -to MainTopic -kind Composition -lower 0 -upper *",
        "LINK -from MainTopic.subtopics -to SubTopic -kind Composition -lower 0 -upper *",
        "LINK -from SubTopic.subtopics -to SubTopic -kind Composition -lower 0 -upper *",
        "LINK -from MindMap.markers -to Marker -kind Composition -lower 0 -upper *",
    ]
    .iter()
    .map(|l| Command::parse(l).expect("static command"))
    .collect()
}

/// Issues the metamodel commands, skipping elements and declarations that
/// already exist. Returns how many commands were applied.
pub fn bootstrap_mindmap_metamodel(backend: &mut dyn EditorBackend) -> Result<usize, String> {
    let mut applied = 0;
    for cmd in metamodel_commands() {
        let exists = match &cmd {
            Command::Create { name, .. } => backend.model().name_taken(name),
            Command::Link {
                from, association, ..
            } => {
                let m = backend.model();
                match m.resolve(from) {
                    Ok(owner) => m.declaration(owner, association).is_some(),
                    Err(_) => false,
                }
            }
            _ => false,
        };
        if exists {
            continue;
        }
        match backend.submit(&cmd)? {
            ApplyResult::Applied(_) => applied += 1,
            ApplyResult::Rejected => {}
            ApplyResult::Error(e) => return Err(format!("{cmd}: {e}")),
        }
    }
    Ok(applied)
}

use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};

use colmod_core::protocol::ProtocolError;
use colmod_core::server::{ConnId, Hub};
use tokio::sync::Notify;

/// A [`Hub`] shared by every transport task, plus one wake-up signal per
/// connection.
#[derive(Clone, Default)]
pub struct SharedHub {
    inner: Arc<Inner>,
}

#[derive(Default)]
struct Inner {
    hub: Mutex<Hub>,
    wakers: Mutex<HashMap<ConnId, Arc<Notify>>>,
}

impl SharedHub {
    pub fn new(queue_capacity: usize) -> Self {
        SharedHub {
            inner: Arc::new(Inner {
                hub: Mutex::new(Hub::new(queue_capacity)),
                wakers: Mutex::default(),
            }),
        }
    }

    /// Locks the hub; poisoning is ignored since hub state stays valid
    /// between calls.
    pub fn lock(&self) -> MutexGuard<'_, Hub> {
        self.inner.hub.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn wakers(&self) -> MutexGuard<'_, HashMap<ConnId, Arc<Notify>>> {
        self.inner.wakers.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn open(&self) -> ConnHandle {
        let id = self.lock().connect();
        let notify = Arc::new(Notify::new());
        self.wakers().insert(id, Arc::clone(&notify));
        ConnHandle {
            hub: self.clone(),
            id,
            notify,
        }
    }
}

/// One transport connection's view of the hub. Dropping it disconnects.
pub struct ConnHandle {
    hub: SharedHub,
    id: ConnId,
    notify: Arc<Notify>,
}

impl ConnHandle {
    pub fn id(&self) -> ConnId {
        self.id
    }

    /// Feeds one received line to the hub and wakes every affected
    /// connection, including dropped ones so their tasks can exit.
    pub fn receive(&self, line: &str) -> Result<(), ProtocolError> {
        let dispatch = self.hub.lock().receive(self.id, line)?;
        let wakers = self.hub.wakers();
        for id in dispatch.woken.iter().chain(&dispatch.dropped) {
            if let Some(n) = wakers.get(id) {
                n.notify_one();
            }
        }
        for id in &dispatch.dropped {
            tracing::warn!(conn = id, "dropping slow consumer");
        }
        Ok(())
    }

    pub async fn wait(&self) {
        self.notify.notified().await;
    }

    /// Queued outbound frames, or `None` once the hub has dropped us.
    pub fn drain(&self) -> Option<Vec<Arc<str>>> {
        let mut hub = self.hub.lock();
        if hub.is_connected(self.id) {
            Some(hub.drain(self.id))
        } else {
            None
        }
    }
}

impl Drop for ConnHandle {
    fn drop(&mut self) {
        self.hub.wakers().remove(&self.id);
        self.hub.lock().disconnect(self.id);
    }
}

//! Serves [`handle_request_at`] over TCP. The async machinery stays inside
//! this module: callers either block the current thread ([`Server::run`],
//! used by the CLI) or get a handle to a background server that shuts down
//! on drop ([`Server::spawn`], used by tests and the demo tooling).

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Body;
use axum::extract::{Request, State};
use axum::response::Response;
use axum::Router;
use thiserror::Error;
use tokio::sync::oneshot;

use crate::service::handle_request_at;
use crate::store::TripleStore;

/// Called once per incoming request with (method, path, raw query) before
/// the request is answered. Used by tests to observe wire traffic.
pub type RequestObserver = Arc<dyn Fn(&str, &str, &str) + Send + Sync>;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("failed to bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("runtime setup failed: {0}")]
    Runtime(std::io::Error),
}

struct Shared {
    store: TripleStore,
    mount_prefix: String,
    observer: Option<RequestObserver>,
}

/// A configured but not-yet-bound server.
pub struct Server {
    shared: Shared,
}

impl Server {
    pub fn new(store: TripleStore) -> Self {
        Server {
            shared: Shared {
                store,
                mount_prefix: String::new(),
                observer: None,
            },
        }
    }

    /// Mount the resource under a prefix, e.g. `/dblp` serves
    /// `/dblp/restpark`.
    pub fn with_mount_prefix(mut self, prefix: impl Into<String>) -> Self {
        self.shared.mount_prefix = prefix.into();
        self
    }

    pub fn with_observer(mut self, observer: RequestObserver) -> Self {
        self.shared.observer = Some(observer);
        self
    }

    fn router(shared: Arc<Shared>) -> Router {
        // One fallback route sees every method and path; status routing
        // (404/405/400) is the pure handler's job, not the framework's.
        Router::new().fallback(serve_one).with_state(shared)
    }

    /// Serve on the current thread until interrupted (Ctrl-C / SIGTERM
    /// equivalent). Logs the bound address once listening.
    pub fn run(self, addr: SocketAddr) -> Result<(), ServerError> {
        let (listener, local) = bind(addr)?;
        let router = Self::router(Arc::new(self.shared));
        let runtime = runtime()?;
        log::info!("listening on http://{local}");
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener)
                .expect("listener registers with the runtime");
            axum::serve(listener, router)
                .with_graceful_shutdown(async {
                    let _ = tokio::signal::ctrl_c().await;
                    log::info!("shutting down");
                })
                .await
                .expect("serve loop runs until shutdown");
        });
        Ok(())
    }

    /// Serve on a background thread. The returned handle reports the bound
    /// address (useful with port 0) and stops the server when dropped.
    pub fn spawn(self, addr: SocketAddr) -> Result<ServerHandle, ServerError> {
        let (listener, local) = bind(addr)?;
        let router = Self::router(Arc::new(self.shared));
        let runtime = runtime()?;
        let (shutdown, stop) = oneshot::channel::<()>();
        log::info!("listening on http://{local}");
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener)
                    .expect("listener registers with the runtime");
                let serve = axum::serve(listener, router);
                // Shutdown drops the accept loop and all connections at
                // once; callers stop sending before dropping the handle.
                tokio::select! {
                    result = serve => result.expect("serve loop runs until shutdown"),
                    _ = stop => {}
                }
            });
        });
        Ok(ServerHandle {
            addr: local,
            shutdown: Some(shutdown),
            thread: Some(thread),
        })
    }
}

fn bind(addr: SocketAddr) -> Result<(std::net::TcpListener, SocketAddr), ServerError> {
    let listener =
        std::net::TcpListener::bind(addr).map_err(|source| ServerError::Bind { addr, source })?;
    listener
        .set_nonblocking(true)
        .map_err(ServerError::Runtime)?;
    let local = listener.local_addr().map_err(ServerError::Runtime)?;
    Ok((listener, local))
}

fn runtime() -> Result<tokio::runtime::Runtime, ServerError> {
    tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .map_err(ServerError::Runtime)
}

async fn serve_one(State(shared): State<Arc<Shared>>, request: Request) -> Response {
    let method = request.method().as_str();
    let path = request.uri().path();
    let raw_query = request.uri().query().unwrap_or("");
    if let Some(observer) = &shared.observer {
        observer(method, path, raw_query);
    }
    let spec = handle_request_at(&shared.store, &shared.mount_prefix, method, path, raw_query);
    let mut response = Response::builder().status(spec.status);
    for (name, value) in &spec.headers {
        response = response.header(name, value);
    }
    response
        .body(Body::from(spec.body))
        .expect("handler emits well-formed headers")
}

/// A running background server; dropping it stops the server and joins the
/// serving thread.
#[derive(Debug)]
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL for a client of this server (no mount prefix included).
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if let Some(shutdown) = self.shutdown.take() {
            let _ = shutdown.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}
